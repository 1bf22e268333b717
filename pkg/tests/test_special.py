import math

import mpmath
import pytest
from hypothesis import given, strategies as st

from pareto_weights.errors import DomainError
from pareto_weights.special import beta, gamma, log_beta, log_gamma, log_gamma_ratio

mpmath.mp.dps = 40


def test_log_gamma_known_values():
    assert log_gamma(1.0) == 0.0 or abs(log_gamma(1.0)) < 1e-15
    assert abs(log_gamma(2.0)) < 1e-15
    assert log_gamma(0.5) == pytest.approx(math.log(math.sqrt(math.pi)), rel=1e-14)
    assert log_gamma(0.5) == pytest.approx(0.5723649429, abs=1e-10)


@given(st.floats(min_value=1e-6, max_value=1e6))
def test_log_gamma_matches_high_precision(x):
    ref = float(mpmath.loggamma(mpmath.mpf(x)))
    got = log_gamma(x)
    assert abs(got - ref) <= 1e-12 * max(1.0, abs(ref))


def test_log_gamma_dense_scan_relative():
    worst = 0.0
    x = 0.01
    while x < 60.0:
        ref = float(mpmath.loggamma(mpmath.mpf(x)))
        if abs(ref) > 1e-3:
            worst = max(worst, abs(log_gamma(x) / ref - 1.0))
        x *= 1.013
    assert worst < 1e-12


@pytest.mark.parametrize("x", [0.0, -1.0, float("nan"), float("inf")])
def test_log_gamma_rejects(x):
    with pytest.raises(DomainError):
        log_gamma(x)


def test_beta_normalizer_at_alpha_1_2():
    ref = float(mpmath.beta(0.8, 1.2))
    assert beta(0.8, 1.2) == pytest.approx(ref, rel=1e-13)
    assert beta(0.8, 1.2) == pytest.approx(1.0689593321156, rel=1e-12)


@given(st.floats(0.05, 50.0), st.floats(0.05, 50.0))
def test_beta_symmetric_and_accurate(a, b):
    assert log_beta(a, b) == pytest.approx(log_beta(b, a), abs=1e-13)
    ref = float(mpmath.log(mpmath.beta(a, b)))
    assert abs(log_beta(a, b) - ref) <= 1e-12 * max(1.0, abs(ref))


def test_gamma_recurrence():
    for x in (0.3, 1.7, 4.2, 9.9):
        assert gamma(x + 1.0) == pytest.approx(x * gamma(x), rel=1e-13)


@pytest.mark.parametrize("n,s", [(10, 0.5), (1000, 1 / 1.5), (10**6, 2 / 1.2), (3, 1.9), (19, 0.3), (10**9, 0.8)])
def test_log_gamma_ratio(n, s):
    ref = float(mpmath.loggamma(n + 1) - mpmath.loggamma(n + 1 - mpmath.mpf(s)))
    assert log_gamma_ratio(n, s) == pytest.approx(ref, rel=1e-12, abs=1e-13)
