"""
Power-law memory weights g_alpha(m) = Gamma(m + alpha) / Gamma(m + 1)

The table is built once per run horizon by the recurrence
g(m + 1) = g(m) * (m + alpha) / (m + 1), starting from g(0) = Gamma(alpha).
"""

import logging
from dataclasses import dataclass

import numpy as np
from scipy.special import gamma

from errors import DomainError

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class KernelTable:
    alpha: float
    horizon: int
    weights: np.ndarray
    prefactor: float
    underflow: bool = False

    def __post_init__(self):
        self.weights.setflags(write=False)


def build_kernel(alpha: float, horizon: int) -> KernelTable:
    if not (0.0 < alpha <= 1.0):
        raise DomainError(f"alpha must be in (0, 1], got {alpha}")
    if horizon < 0:
        raise DomainError(f"horizon must be >= 0, got {horizon}")

    m = np.arange(horizon, dtype=np.float64)
    factors = np.empty(horizon + 1, dtype=np.float64)
    factors[0] = gamma(alpha)
    factors[1:] = (m + alpha) / (m + 1.0)
    # cumprod multiplies left to right, so weights[m+1] == weights[m] * factors[m+1]
    weights = np.cumprod(factors)

    tiny = np.finfo(np.float64).tiny
    underflow = bool(not np.all(np.isfinite(weights)) or np.any(weights < tiny))
    if underflow:
        logger.warning(f"kernel weights left the normal range (alpha={alpha}, horizon={horizon})")

    return KernelTable(
        alpha=float(alpha),
        horizon=int(horizon),
        weights=weights,
        prefactor=float(1.0 / gamma(alpha)),
        underflow=underflow,
    )


def kernel_asymptotic_ratio(table: KernelTable, m: int) -> float:
    """weights[m] / m^(alpha - 1); tends to 1 as m grows."""
    if m < 1 or m > table.horizon:
        raise IndexError(f"lag {m} outside [1, {table.horizon}]")
    return float(table.weights[m] / float(m) ** (table.alpha - 1.0))
