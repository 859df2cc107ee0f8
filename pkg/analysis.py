"""
Observables and statistics over simulation output: spatial mean / std,
synchronization time, power-law fits, period detection and the two
asymptotic branches of Mittag-Leffler relaxation used as reference curves.
"""

import logging
from dataclasses import dataclass, field
from enum import Enum
from typing import Any, Dict, Optional, Sequence

import numpy as np
from scipy.special import gamma

from config import FIT_MIN_POINTS, PERIOD_MAX_WINDOW, PERIOD_TOLERANCE
from errors import DomainError, InsufficientDataError, ShapeError

logger = logging.getLogger(__name__)


@dataclass
class ObservableSeries:
    times: np.ndarray
    mean_field: np.ndarray
    spatial_std: np.ndarray
    spread: np.ndarray
    diverged: bool = False
    metadata: Dict[str, Any] = field(default_factory=dict)
    # trajectory of metadata["record_site"]
    site_series: Optional[np.ndarray] = None
    # field rows kept for the heat map, one per time in snapshot_times
    snapshots: Optional[np.ndarray] = None
    snapshot_times: Optional[np.ndarray] = None

    def __post_init__(self):
        n = len(self.times)
        for name in ("mean_field", "spatial_std", "spread"):
            if len(getattr(self, name)) != n:
                raise ShapeError(f"{name} has {len(getattr(self, name))} entries, times has {n}")

    def __len__(self):
        return len(self.times)


@dataclass
class SyncTimeResult:
    T_N: Optional[int]
    threshold: float
    mean: Optional[float] = None
    stderr: float = 0.0
    count: int = 0
    censored: int = 0

    @property
    def reached(self) -> bool:
        return self.count > 0


@dataclass
class PowerLawFit:
    exponent: float
    amplitude: float
    t_lo: float
    t_hi: float
    residual: float
    points: int = 0
    excluded: int = 0
    period: int = 1


class Regime(str, Enum):
    SMALL = "small"
    LARGE = "large"


def spatial_std(field: np.ndarray) -> float:
    """Population standard deviation across sites."""
    values = np.asarray(field, dtype=np.float64)
    if values.size < 2:
        raise DomainError(f"need at least 2 sites, got {values.size}")
    return float(np.std(values))


def spread(field: np.ndarray) -> float:
    values = np.asarray(field, dtype=np.float64)
    return float(np.max(values) - np.min(values))


def _single_sync(index: Optional[int], threshold: float) -> SyncTimeResult:
    if index is None:
        return SyncTimeResult(T_N=None, threshold=threshold, censored=1)
    return SyncTimeResult(T_N=index, threshold=threshold, mean=float(index), count=1)


def sync_time_from_spread(
    spreads: Sequence[float],
    threshold: float,
    times: Optional[Sequence[int]] = None,
) -> SyncTimeResult:
    if not threshold > 0:
        raise DomainError(f"threshold must be > 0, got {threshold}")
    below = np.flatnonzero(np.asarray(spreads, dtype=np.float64) < threshold)
    if below.size == 0:
        return _single_sync(None, threshold)
    first = int(below[0])
    return _single_sync(int(times[first]) if times is not None else first, threshold)


def sync_time(fields, threshold: float) -> SyncTimeResult:
    """First row t (time index) whose max - min across sites is below threshold."""
    rows = np.atleast_2d(np.asarray(fields, dtype=np.float64))
    return sync_time_from_spread(np.ptp(rows, axis=1), threshold)


def summarize_sync_times(results: Sequence[SyncTimeResult], threshold: float) -> SyncTimeResult:
    """Ensemble mean and standard error over the members that synchronized."""
    reached = np.array([r.T_N for r in results if r.T_N is not None], dtype=np.float64)
    censored = len(results) - reached.size
    if censored:
        logger.warning(f"{censored} of {len(results)} ensemble members did not synchronize; excluded from the mean")
    if reached.size == 0:
        return SyncTimeResult(T_N=None, threshold=threshold, censored=censored)
    stderr = float(np.std(reached, ddof=1) / np.sqrt(reached.size)) if reached.size > 1 else 0.0
    return SyncTimeResult(
        T_N=None,
        threshold=threshold,
        mean=float(np.mean(reached)),
        stderr=stderr,
        count=int(reached.size),
        censored=censored,
    )


def _loglog_fit(x: np.ndarray, y: np.ndarray):
    logx = np.log(x)
    logy = np.log(y)
    slope, intercept = np.polyfit(logx, logy, 1)
    residual = float(np.sqrt(np.mean((logy - (slope * logx + intercept)) ** 2)))
    return float(slope), float(intercept), residual


def _block_average(values: np.ndarray, period: int) -> np.ndarray:
    blocks = values.size // period
    return values[: blocks * period].reshape(blocks, period).mean(axis=1)


def fit_power_law(
    times: Sequence[float],
    values: Sequence[float],
    t_lo: float,
    t_hi: float,
    deoscillate_period: int = 1,
) -> PowerLawFit:
    """
    Least squares on (log t, log value) inside [t_lo, t_hi] after averaging
    consecutive groups of deoscillate_period samples. The exponent is the
    negated slope, so a decay t^-a gives exponent a.
    """
    if not t_lo < t_hi:
        raise DomainError(f"fit window needs t_lo < t_hi, got [{t_lo}, {t_hi}]")
    if deoscillate_period < 1:
        raise DomainError(f"deoscillate_period must be >= 1, got {deoscillate_period}")

    t = np.asarray(times, dtype=np.float64)
    v = np.asarray(values, dtype=np.float64)
    in_window = (t >= t_lo) & (t <= t_hi) & (t > 0)
    usable = in_window & np.isfinite(v) & (v > 0)
    excluded = int(np.count_nonzero(in_window) - np.count_nonzero(usable))
    if np.count_nonzero(usable) < FIT_MIN_POINTS:
        raise InsufficientDataError(
            f"{np.count_nonzero(usable)} usable points in [{t_lo}, {t_hi}], need {FIT_MIN_POINTS}"
        )

    t_fit = _block_average(t[usable], deoscillate_period)
    v_fit = _block_average(v[usable], deoscillate_period)
    if t_fit.size < 3:
        raise InsufficientDataError(f"only {t_fit.size} points left after averaging over {deoscillate_period}")

    slope, intercept, residual = _loglog_fit(t_fit, v_fit)
    return PowerLawFit(
        exponent=-slope,
        amplitude=float(np.exp(intercept)),
        t_lo=float(t_lo),
        t_hi=float(t_hi),
        residual=residual,
        points=int(t_fit.size),
        excluded=excluded,
        period=int(deoscillate_period),
    )


def fit_sync_scaling(N_values: Sequence[int], T_N_means: Sequence[float]) -> PowerLawFit:
    """T_N ~ N^z; returns z as a positive exponent."""
    n = np.asarray(N_values, dtype=np.float64)
    tn = np.asarray(T_N_means, dtype=np.float64)
    if n.size != tn.size:
        raise ShapeError(f"{n.size} sizes but {tn.size} T_N values")
    if n.size < 3:
        raise InsufficientDataError(f"need at least 3 system sizes, got {n.size}")
    if np.any(n <= 0) or np.any(~np.isfinite(tn)) or np.any(tn <= 0):
        raise DomainError("sizes and T_N values must be positive")

    slope, intercept, residual = _loglog_fit(n, tn)
    return PowerLawFit(
        exponent=slope,
        amplitude=float(np.exp(intercept)),
        t_lo=float(n.min()),
        t_hi=float(n.max()),
        residual=residual,
        points=int(n.size),
    )


def default_period_window(length: int) -> int:
    return max(2, min(PERIOD_MAX_WINDOW, length // 10))


def detect_period(
    series: Sequence[float],
    max_period: int,
    tol: float = PERIOD_TOLERANCE,
    window: Optional[int] = None,
) -> Optional[int]:
    """
    Smallest k <= max_period with |s[t] - s[t-k]| < tol over the trailing
    window, or None when the tail is aperiodic at that tolerance.
    """
    s = np.asarray(series, dtype=np.float64)
    if window is None:
        window = default_period_window(s.size)
    if window > s.size:
        raise DomainError(f"window {window} longer than series ({s.size})")
    if not max_period < window:
        raise DomainError(f"max_period {max_period} must be < window {window}")

    start = s.size - window
    for k in range(1, max_period + 1):
        lo = max(start, k)
        diffs = np.abs(s[lo:] - s[lo - k:s.size - k])
        if diffs.size and np.all(diffs < tol):
            return k
    return None


def ml_asymptotic(t, alpha: float, regime: Regime):
    """
    Asymptotic branches of e_alpha(t) = E_alpha(-t^alpha):
    small t -> exp(-t^alpha / Gamma(1 + alpha)), large t -> t^-alpha / Gamma(1 - alpha).
    """
    regime = Regime(regime)
    tt = np.asarray(t, dtype=np.float64)
    if np.any(tt <= 0):
        raise DomainError("t must be > 0")
    if not 0.0 < alpha <= 1.0:
        raise DomainError(f"alpha must be in (0, 1), got {alpha}")
    if regime == Regime.SMALL:
        value = np.exp(-(tt ** alpha) / gamma(1.0 + alpha))
    else:
        if alpha == 1.0:
            raise DomainError("large-time branch has a pole at alpha = 1 (Gamma(0))")
        value = tt ** (-alpha) / gamma(1.0 - alpha)
    if np.ndim(value) == 0:
        return float(value)
    return value


def fit_sigma_decay(
    series: ObservableSeries,
    t_lo: Optional[float] = None,
    t_hi: Optional[float] = None,
    deoscillate_period: Optional[int] = None,
) -> PowerLawFit:
    """
    sigma(t) decay fit with the default window [T/100, T]. When no period is
    given, it is detected on log sigma so that period-2 modulation of the
    synchronized state averages out.
    """
    if len(series) == 0:
        raise InsufficientDataError("empty series")
    T = float(series.times[-1])
    lo = t_lo if t_lo is not None else max(1.0, T / 100.0)
    hi = t_hi if t_hi is not None else T
    if not lo < hi:
        raise InsufficientDataError(f"run too short for a decay fit (window [{lo}, {hi}])")

    if deoscillate_period is None:
        deoscillate_period = 1
        positive = series.spatial_std[series.spatial_std > 0]
        if positive.size > 20:
            window = default_period_window(positive.size)
            max_period = min(6, window - 1)
            found = detect_period(np.log(positive), max_period, PERIOD_TOLERANCE, window)
            if found is not None:
                deoscillate_period = found
    return fit_power_law(series.times, series.spatial_std, lo, hi, deoscillate_period)
