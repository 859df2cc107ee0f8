#!/usr/bin/env python3
"""
Tests for observables, synchronization times, fits and period detection
"""

import math

import numpy as np
import pytest
from scipy.special import gamma

from analysis import (
    ObservableSeries,
    Regime,
    SyncTimeResult,
    detect_period,
    fit_power_law,
    fit_sigma_decay,
    fit_sync_scaling,
    ml_asymptotic,
    spatial_std,
    spread,
    summarize_sync_times,
    sync_time,
    sync_time_from_spread,
)
from errors import DomainError, InsufficientDataError, ShapeError


def test_spatial_std_examples():
    assert spatial_std([1, 1, 1, 1]) == 0.0
    assert spatial_std([0, 2]) == 1.0
    assert spatial_std([0, 0, 0, 4]) == pytest.approx(math.sqrt(3), abs=1e-15)
    with pytest.raises(DomainError):
        spatial_std([1.0])


def test_spatial_std_translation_and_scaling():
    x = np.random.default_rng(2).normal(size=50)
    base = spatial_std(x)
    assert spatial_std(x + 3.7) == pytest.approx(base, rel=1e-12)
    assert spatial_std(-2.5 * x) == pytest.approx(2.5 * base, rel=1e-12)


def test_spread():
    assert spread([0.1, -0.4, 0.3]) == pytest.approx(0.7, abs=1e-15)


def test_sync_time_examples():
    uniform = np.full((5, 4), 0.2)
    assert sync_time(uniform, 0.01).T_N == 0

    fields = [[0.0, 0.02], [0.0, 0.015], [0.0, 0.009]]
    result = sync_time(fields, 0.01)
    assert result.T_N == 2
    assert result.reached

    never = sync_time([[0.0, 1.0], [0.0, 0.5]], 0.01)
    assert never.T_N is None
    assert not never.reached
    assert never.censored == 1


def test_sync_time_monotone_in_threshold():
    rng = np.random.default_rng(4)
    spreads = np.abs(rng.normal(size=200)) * np.exp(-np.arange(200) / 30.0)
    previous = None
    for threshold in (1e-3, 1e-2, 1e-1, 1.0):
        t = sync_time_from_spread(spreads, threshold).T_N
        if previous is not None and t is not None:
            assert t <= previous
        previous = t if t is not None else previous


def test_sync_time_uses_given_times():
    assert sync_time_from_spread([1.0, 0.5, 0.001], 0.01, times=[0, 10, 20]).T_N == 20
    with pytest.raises(DomainError):
        sync_time_from_spread([1.0], 0.0)


def test_summarize_sync_times():
    same = [SyncTimeResult(T_N=40, threshold=0.01, mean=40.0, count=1) for _ in range(5)]
    summary = summarize_sync_times(same, 0.01)
    assert summary.mean == 40.0
    assert summary.stderr == 0.0
    assert summary.count == 5

    mixed = [
        SyncTimeResult(T_N=10, threshold=0.01, mean=10.0, count=1),
        SyncTimeResult(T_N=20, threshold=0.01, mean=20.0, count=1),
        SyncTimeResult(T_N=None, threshold=0.01, censored=1),
    ]
    summary = summarize_sync_times(mixed, 0.01)
    assert summary.mean == 15.0
    assert summary.stderr == pytest.approx(5.0, abs=1e-12)
    assert summary.count == 2
    assert summary.censored == 1

    none = summarize_sync_times([SyncTimeResult(T_N=None, threshold=0.01, censored=1)], 0.01)
    assert none.mean is None
    assert not none.reached


def test_fit_exact_power_law():
    t = np.arange(1, 10001, dtype=np.float64)
    fit = fit_power_law(t, t ** -0.6, 10, 1e4)
    assert fit.exponent == pytest.approx(0.6, abs=1e-12)
    scaled = fit_power_law(t, 5.0 * t ** -0.6, 10, 1e4)
    assert scaled.exponent == pytest.approx(fit.exponent, abs=1e-10)
    assert scaled.amplitude == pytest.approx(5.0, rel=1e-9)


def test_fit_with_period_two_modulation():
    t = np.arange(1, 10001, dtype=np.float64)
    values = 3.0 * t ** -0.4 * (1.0 + 0.2 * (-1.0) ** t)
    fit = fit_power_law(t, values, 10, 1e4, deoscillate_period=2)
    assert fit.exponent == pytest.approx(0.4, abs=0.01)
    assert fit.period == 2


def test_fit_constant_series():
    t = np.arange(1, 200, dtype=np.float64)
    fit = fit_power_law(t, np.full(t.size, 0.7), 1, 199)
    assert abs(fit.exponent) < 1e-12


def test_fit_needs_enough_points():
    t = np.arange(1, 6, dtype=np.float64)
    with pytest.raises(InsufficientDataError):
        fit_power_law(t, t ** -1.0, 1, 5)
    with pytest.raises(DomainError):
        fit_power_law(t, t, 5, 1)


def test_fit_reports_excluded_points():
    t = np.arange(1, 101, dtype=np.float64)
    values = t ** -0.5
    values[[10, 20, 30]] = 0.0
    fit = fit_power_law(t, values, 1, 100)
    assert fit.excluded == 3
    assert fit.points == 97
    assert fit.exponent == pytest.approx(0.5, abs=1e-12)


def test_sync_scaling_fit():
    sizes = [25, 50, 100, 200]
    assert fit_sync_scaling(sizes, sizes).exponent == pytest.approx(1.0, abs=1e-12)
    t_n = [5.0 * n ** 1.22 for n in sizes]
    assert fit_sync_scaling(sizes, t_n).exponent == pytest.approx(1.22, abs=1e-10)
    with pytest.raises(InsufficientDataError):
        fit_sync_scaling([25, 50], [10.0, 20.0])
    with pytest.raises(ShapeError):
        fit_sync_scaling([25, 50, 100], [10.0, 20.0])


def test_detect_period():
    assert detect_period(np.full(500, 0.3), 6) == 1
    assert detect_period(np.tile([0.1, -0.2, 0.4], 200), 6) == 3
    assert detect_period(np.tile([0.0, 1.0, 2.0, 0.0, 1.0, 2.5], 100), 8) == 6
    assert detect_period(np.tile([0.0, 1.0], 300), 6) == 2


def test_detect_period_aperiodic():
    noise = np.random.default_rng(6).uniform(size=1000)
    assert detect_period(noise, 10) is None


def test_detect_period_window_checks():
    with pytest.raises(DomainError):
        detect_period(np.zeros(10), 3, window=20)
    with pytest.raises(DomainError):
        detect_period(np.zeros(100), 10, window=10)


def test_ml_small_time_branch():
    assert ml_asymptotic(1e-12, 0.5, Regime.SMALL) == pytest.approx(1.0, abs=1e-5)
    t = np.array([0.01, 0.1])
    expected = np.exp(-(t ** 0.7) / gamma(1.7))
    assert np.allclose(ml_asymptotic(t, 0.7, "small"), expected, rtol=1e-14)


def test_ml_large_time_branch():
    assert ml_asymptotic(100.0, 0.5, Regime.LARGE) == pytest.approx(0.05641895835477563, rel=1e-12)
    for alpha in (0.3, 0.6):
        ratio = ml_asymptotic(200.0, alpha, "large") / ml_asymptotic(100.0, alpha, "large")
        assert ratio == pytest.approx(2.0 ** -alpha, rel=1e-12)


def test_ml_large_time_reflection_form():
    for alpha in (0.25, 0.5, 0.8):
        t = 50.0
        reflected = math.sin(alpha * math.pi) / math.pi * gamma(alpha) / t ** alpha
        assert ml_asymptotic(t, alpha, "large") == pytest.approx(reflected, rel=1e-12)


def test_ml_domain():
    with pytest.raises(DomainError):
        ml_asymptotic(10.0, 1.0, Regime.LARGE)
    with pytest.raises(DomainError):
        ml_asymptotic(0.0, 0.5, Regime.SMALL)
    with pytest.raises(DomainError):
        ml_asymptotic(1.0, 1.5, Regime.SMALL)


def synthetic_series(T: int, alpha: float, modulation: float) -> ObservableSeries:
    times = np.arange(T + 1)
    t = np.maximum(times, 1).astype(np.float64)
    std = t ** -alpha * (1.0 + modulation * (-1.0) ** times)
    return ObservableSeries(
        times=times,
        mean_field=np.zeros(T + 1),
        spatial_std=std,
        spread=2 * std,
    )


def test_sigma_decay_detects_period_two():
    fit = fit_sigma_decay(synthetic_series(10000, 0.6, 0.2))
    assert fit.period == 2
    assert fit.t_lo == 100.0
    assert fit.t_hi == 10000.0
    assert fit.exponent == pytest.approx(0.6, abs=0.01)


def test_sigma_decay_without_modulation():
    fit = fit_sigma_decay(synthetic_series(5000, 0.5, 0.0))
    assert fit.period == 1
    assert fit.exponent == pytest.approx(0.5, abs=1e-3)


def test_series_length_check():
    with pytest.raises(ShapeError):
        ObservableSeries(times=np.arange(3), mean_field=np.zeros(3), spatial_std=np.zeros(2), spread=np.zeros(3))


if __name__ == "__main__":
    test_fit_exact_power_law()
    test_sigma_decay_detects_period_two()
    print("analysis tests passed")
