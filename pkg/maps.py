"""
On-site maps f(x) for the coupled lattice.
The Gauss map is the one the engine uses by default; the Bernoulli map is an
alternative behind the same interface.
"""

from typing import List, Union

import numpy as np
from pydantic import BaseModel, confloat, validator
from scipy.optimize import brentq

from config import DEFAULT_BETA, DEFAULT_NU
from errors import DomainError

ArrayLike = Union[float, np.ndarray]


class OnSiteMap(BaseModel):
    """Common interface: evaluate f on a scalar or on a whole field."""

    class Config:
        allow_mutation = False

    def evaluate(self, x: ArrayLike) -> ArrayLike:
        raise NotImplementedError

    def bound(self) -> float:
        """Largest |f(x)| over the reals."""
        raise NotImplementedError


class GaussMapParams(OnSiteMap):
    # used as exp(-nu * x^2); nu > 0 keeps f bounded
    nu: float = DEFAULT_NU
    beta: float = DEFAULT_BETA

    @validator("nu")
    def nu_positive(cls, v):
        if not v > 0:
            raise ValueError(f"nu must be > 0, got {v}")
        return v

    def evaluate(self, x: ArrayLike) -> ArrayLike:
        return gauss_eval(self, x)

    def bound(self) -> float:
        return max(abs(self.beta), abs(1.0 + self.beta))


class BernoulliMapParams(OnSiteMap):
    slope: confloat(gt=0) = 2.0

    def evaluate(self, x: ArrayLike) -> ArrayLike:
        return bernoulli_eval(self, x)

    def bound(self) -> float:
        return 1.0


def _check_finite(x: ArrayLike):
    if not np.all(np.isfinite(x)):
        raise DomainError("on-site map evaluated at a non-finite value")


def gauss_eval(params: GaussMapParams, x: ArrayLike) -> ArrayLike:
    """exp(-nu * x^2) + beta, elementwise."""
    _check_finite(x)
    value = np.exp(-params.nu * np.square(x)) + params.beta
    if np.ndim(value) == 0:
        return float(value)
    return value


def bernoulli_eval(params: BernoulliMapParams, x: ArrayLike) -> ArrayLike:
    _check_finite(x)
    value = np.mod(params.slope * np.asarray(x, dtype=np.float64), 1.0)
    if np.ndim(value) == 0:
        return float(value)
    return value


def classical_iterate(params: OnSiteMap, x0: float, steps: int) -> np.ndarray:
    """Integer-order orbit x(t+1) = f(x(t)), returned with x0 as its first entry."""
    if steps < 0:
        raise DomainError(f"steps must be >= 0, got {steps}")
    orbit: List[float] = [float(x0)]
    x = float(x0)
    for _ in range(steps):
        x = params.evaluate(x)
        orbit.append(x)
    return np.array(orbit, dtype=np.float64)


def gauss_fixed_point(params: GaussMapParams, xtol: float = 1e-15) -> float:
    """A fixed point of the Gauss map, bracketed on [beta, 1 + beta]."""
    lo = params.beta
    hi = 1.0 + params.beta
    g = lambda x: gauss_eval(params, x) - x
    if g(hi) == 0.0:
        return hi
    return float(brentq(g, lo, hi, xtol=xtol, rtol=4 * np.finfo(float).eps))
