#!/usr/bin/env python3
"""
Tests for the memory kernel table
"""

import math

import numpy as np
import pytest
from scipy.special import gamma, poch

from errors import DomainError
from kernel import build_kernel, kernel_asymptotic_ratio


def test_alpha_one_is_all_ones():
    table = build_kernel(1.0, 5)
    assert table.weights.tolist() == [1.0] * 6
    assert table.prefactor == 1.0


def test_first_weights_at_half():
    table = build_kernel(0.5, 1)
    assert table.weights[0] == pytest.approx(1.7724538509055159, rel=1e-12)
    assert table.weights[1] == pytest.approx(0.8862269254527579, rel=1e-12)
    assert table.prefactor == pytest.approx(1.0 / math.sqrt(math.pi), rel=1e-12)


def test_weight_zero_is_gamma_alpha():
    for alpha in (0.1, 0.37, 0.6, 0.99):
        table = build_kernel(alpha, 3)
        assert abs(table.weights[0] - gamma(alpha)) / gamma(alpha) < 1e-12


def test_recurrence_is_the_construction():
    alpha = 0.43
    table = build_kernel(alpha, 2000)
    w = table.weights
    for m in (0, 1, 7, 100, 1999):
        assert w[m + 1] == w[m] * ((m + alpha) / (m + 1))


def test_matches_gamma_ratio_oracle():
    # Gamma(m + alpha) / Gamma(m + 1) == poch(m + 1, alpha - 1)
    m = np.arange(100001, dtype=np.float64)
    for alpha in np.round(np.arange(0.1, 1.0, 0.1), 10):
        table = build_kernel(float(alpha), 100000)
        oracle = poch(m + 1.0, alpha - 1.0)
        rel = np.abs(table.weights - oracle) / oracle
        assert rel.max() < 1e-10, f"alpha={alpha}: max relative error {rel.max():.3e}"


def test_strictly_positive_and_decreasing():
    for alpha in (0.05, 0.4, 0.8, 0.999):
        w = build_kernel(alpha, 10000).weights
        assert np.all(w > 0)
        assert np.all(np.diff(w) < 0)


def test_table_is_read_only():
    table = build_kernel(0.6, 10)
    with pytest.raises(ValueError):
        table.weights[0] = 1.0


def test_domain_errors():
    for alpha in (0.0, -0.2, 1.5):
        with pytest.raises(DomainError):
            build_kernel(alpha, 10)
    with pytest.raises(DomainError):
        build_kernel(0.5, -1)


def test_zero_horizon():
    table = build_kernel(0.3, 0)
    assert table.weights.shape == (1,)
    assert not table.underflow


def test_asymptotic_ratio_examples():
    assert kernel_asymptotic_ratio(build_kernel(1.0, 100), 100) == 1.0
    assert kernel_asymptotic_ratio(build_kernel(0.5, 10000), 10000) == pytest.approx(1.0, abs=1e-4)
    assert 0.9 < kernel_asymptotic_ratio(build_kernel(0.4, 10), 10) < 1.1


def test_asymptotic_ratio_bound():
    for alpha in (0.2, 0.5, 0.8):
        table = build_kernel(alpha, 100000)
        for m in (1000, 5000, 20000, 100000):
            assert abs(kernel_asymptotic_ratio(table, m) - 1.0) < 2 * alpha / m


def test_asymptotic_ratio_range():
    table = build_kernel(0.5, 10)
    with pytest.raises(IndexError):
        kernel_asymptotic_ratio(table, 0)
    with pytest.raises(IndexError):
        kernel_asymptotic_ratio(table, 11)


if __name__ == "__main__":
    test_alpha_one_is_all_ones()
    test_matches_gamma_ratio_oracle()
    print("kernel tests passed")
