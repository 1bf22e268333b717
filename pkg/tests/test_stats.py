import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from pareto_weights.errors import DomainError
from pareto_weights.stats import (HistogramGrid, accumulate, binned_conditional, empirical_mode,
                                  fit_power_law, linear_edges, log_edges, nearest_rank_quantile)


def test_log_edges_are_decade_aligned():
    e = log_edges(0.003, 0.5, 10)
    assert e[0] <= 0.003 and e[-1] >= 0.5
    assert np.allclose(np.log10(e) * 10, np.round(np.log10(e) * 10))
    f = log_edges(0.01, 5.0, 10)
    common = np.intersect1d(e, f)
    assert common.size >= 10
    with pytest.raises(DomainError):
        log_edges(0.0, 1.0)


def test_left_closed_and_tallies():
    g = HistogramGrid.linear(0.0, 1.0, 4)
    accumulate(g, 0.25)
    assert g.counts.tolist() == [0, 1, 0, 0]
    accumulate(g, -0.1)
    accumulate(g, 1.0)
    assert (g.underflow, g.overflow, g.total) == (1, 1, 3)
    with pytest.raises(DomainError):
        accumulate(g, float("nan"))
    with pytest.raises(DomainError):
        g.accumulate_many([0.1, float("nan")])


def test_vector_and_scalar_paths_agree():
    x = np.random.default_rng(0).uniform(-0.2, 1.2, 1000)
    a, b = HistogramGrid.linear(0, 1, 7), HistogramGrid.linear(0, 1, 7)
    for v in x:
        a.accumulate(float(v))
    b.accumulate_many(x)
    assert np.array_equal(a.counts, b.counts)
    assert (a.underflow, a.overflow) == (b.underflow, b.overflow)


def test_uniform_density_is_flat():
    g = HistogramGrid.linear(0.0, 1.0, 10)
    g.accumulate_many(np.random.default_rng(1).random(10**6))
    assert np.allclose(g.density, 1.0, rtol=0.01)


@given(st.lists(st.floats(-5, 5, allow_nan=False), min_size=1, max_size=300))
def test_density_integrates_to_inside_fraction(xs):
    g = HistogramGrid.linear(-2.0, 3.0, 9)
    g.accumulate_many(xs)
    inside = 1.0 - (g.underflow + g.overflow) / g.total
    assert float(np.sum(g.density * g.widths)) == pytest.approx(inside, abs=1e-12)
    assert g.counts.sum() + g.underflow + g.overflow == len(xs)


@given(st.lists(st.floats(0.001, 100), max_size=50), st.lists(st.floats(0.001, 100), max_size=50),
       st.lists(st.floats(0.001, 100), max_size=50))
def test_merge_associative_commutative(a, b, c):
    def h(x):
        return HistogramGrid.log(0.01, 10.0, 4).accumulate_many(x)
    ga, gb, gc = h(a), h(b), h(c)
    left = ga.merge(gb).merge(gc)
    right = gc.merge(gb.merge(ga))
    assert np.array_equal(left.counts, right.counts)
    assert (left.underflow, left.overflow) == (right.underflow, right.overflow)
    assert np.array_equal(left.counts, h(a + b + c).counts)


def test_merge_rejects_different_edges():
    with pytest.raises(DomainError):
        HistogramGrid.linear(0, 1, 3).merge(HistogramGrid.linear(0, 1, 4))


def test_mode_single_bin_and_ties():
    g = HistogramGrid.linear(0.0, 4.0, 4)
    g.accumulate_many(np.full(1000, 2.5))
    assert empirical_mode(g) == 2.5
    t = HistogramGrid.linear(0.0, 4.0, 4)
    t.accumulate_many([0.5] * 600 + [3.5] * 600)
    assert empirical_mode(t) == 0.5
    with pytest.raises(DomainError):
        empirical_mode(HistogramGrid.linear(0, 1, 3))
    small = HistogramGrid.linear(0, 1, 3).accumulate_many([0.5] * 10)
    with pytest.raises(DomainError):
        empirical_mode(small)


def test_mode_per_log_unit_differs():
    g = HistogramGrid.log(1.0, 100.0, 2)
    g.accumulate_many(np.random.default_rng(2).uniform(1.0, 100.0, 10_000))
    assert empirical_mode(g, per="linear") < 10 < empirical_mode(g, per="log")


def test_nearest_rank():
    v = np.arange(1.0, 11.0)
    assert nearest_rank_quantile(v, 0.0) == 1.0
    assert nearest_rank_quantile(v, 0.1) == 1.0
    assert nearest_rank_quantile(v, 0.11) == 2.0
    assert nearest_rank_quantile(v, 1.0) == 10.0
    assert math.isnan(nearest_rank_quantile(np.array([]), 0.5))


@given(st.lists(st.floats(-1e6, 1e6), min_size=1, max_size=80), st.floats(0, 1), st.floats(0, 1))
def test_nearest_rank_monotone(xs, q1, q2):
    v = np.sort(np.array(xs))
    lo, hi = sorted((q1, q2))
    assert nearest_rank_quantile(v, lo) <= nearest_rank_quantile(v, hi)


def test_binned_constant_response():
    x = np.random.default_rng(3).uniform(1, 10, 500)
    c = binned_conditional(np.full(500, 0.7), x, log_edges(0.5, 20.0, 5))
    occ = ~c.empty
    assert np.all(c.mean[occ] == 0.7) and np.all(c.q_lo[occ] == 0.7) and np.all(c.q_hi[occ] == 0.7)
    assert np.all(np.isnan(c.mean[c.empty]))
    assert c.empty.any()


def test_binned_recovers_noise_free_curve():
    from pareto_weights.analytic import sweepstakes_curve
    from pareto_weights.sampling import AlphaParam
    p = AlphaParam(1.2, 10**5)
    r = np.repeat(np.geomspace(1.1, 50.0, 12), 30) * p.mu * p.n
    y = sweepstakes_curve(p, r)
    edges = log_edges(1.0, 60.0, 20)
    c = binned_conditional(y, r / (p.mu * p.n), edges)
    occ = ~c.empty
    expect = sweepstakes_curve(p, c.centers[occ] * p.mu * p.n)
    assert np.allclose(c.mean[occ], expect, rtol=1e-12, atol=0)
    assert np.all(c.low_confidence[occ] == (c.counts[occ] < 20))


def test_binned_rejects_mismatch():
    with pytest.raises(DomainError):
        binned_conditional([1.0, 2.0], [1.0], [0.0, 5.0])


@given(st.lists(st.tuples(st.floats(0.5, 50), st.floats(0.001, 10)), min_size=5, max_size=200))
def test_binned_quantiles_bracket_mean(pairs):
    x = np.array([p[0] for p in pairs])
    y = np.array([p[1] for p in pairs])
    c = binned_conditional(y, x, log_edges(0.5, 50.0, 3), q_levels=(0.0, 1.0))
    occ = ~c.empty
    assert np.all(c.q_lo[occ] <= c.mean[occ] * (1 + 1e-12))
    assert np.all(c.mean[occ] <= c.q_hi[occ] * (1 + 1e-12))


def test_power_law_exact():
    pts = [(n, n**0.25) for n in (1e3, 1e4, 1e5, 1e6)]
    f = fit_power_law(pts)
    assert f.slope == pytest.approx(0.25, abs=1e-13)
    assert f.slope_stderr < 1e-12
    assert f.r2 == pytest.approx(1.0)


@given(st.floats(-3, 3), st.floats(0.01, 100))
def test_power_law_recovers_synthetic(a, c):
    f = fit_power_law([(n, c * n**a) for n in (10.0, 100.0, 1e3, 1e4)])
    assert f.slope == pytest.approx(a, abs=1e-9)


def test_power_law_errors():
    with pytest.raises(DomainError):
        fit_power_law([(1, 1), (2, 2)])
    with pytest.raises(DomainError):
        fit_power_law([(1, 1), (2, -2), (3, 3)])
