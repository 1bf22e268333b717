import math
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, strategies as st
from scipy import stats

from pareto_weights import analytic as an
from pareto_weights.errors import ConfigError, DomainError, RegimeError
from pareto_weights.recursion import (RecursionState, RhoSampler, chain_final_state, chain_histograms,
                                      default_grids, rho_proposal_acceptance, run_chain,
                                      sample_rho_weight, step)
from pareto_weights.sampling import AlphaParam
from pareto_weights.stats import HistogramGrid
from pareto_weights.streams import make_stream

P4 = AlphaParam(1.2, 10**4)


def test_step_examples():
    s = step(RecursionState(0.3, 0.4, 0.1), 1.0)
    assert (s.y, s.w_max, s.w_max2) == (1.0, 1.0, 0.0)
    assert step(RecursionState(1.0, 1.0, 0.0), 0.5).y == 0.5
    s = step(RecursionState(0.5, 0.6, 0.3), 0.5)
    assert s.w_max == 0.5 and s.w_max2 == 0.3 and s.step == 1
    with pytest.raises(DomainError):
        step(RecursionState(0.5, 0.6, 0.3), 1.5)
    with pytest.raises(DomainError):
        RecursionState(0.5, 0.3, 0.6)


@st.composite
def states(draw):
    w1 = draw(st.floats(0.0, 1.0))
    w2 = draw(st.floats(0.0, 1.0)) * w1
    y = draw(st.floats(0.0, 1.0))
    return RecursionState(y, w1, w2)


@given(states(), st.floats(0.0, 1.0))
def test_step_algebra_and_invariants(s, w):
    n = step(s, w)
    fw, fy = Fraction(w), Fraction(s.y)
    exact_y = fw * fw + (1 - fw) ** 2 * fy
    assert abs(Fraction(n.y) - exact_y) <= Fraction(1, 2**50)
    third = sorted([w, (1 - w) * s.w_max, (1 - w) * s.w_max2], reverse=True)
    assert n.w_max == pytest.approx(third[0], abs=1e-15)
    assert n.w_max2 == pytest.approx(third[1], abs=1e-15)
    assert 0.0 <= n.w_max2 <= n.w_max <= 1.0 and 0.0 <= n.y <= 1.0


def test_scan_matches_scalar_steps():
    a = chain_final_state(P4, 3000, make_stream(5))
    blocks = list(run_chain(P4, 3000, 0, 1, make_stream(5), block=256))
    assert blocks[-1].y[-1] == a.y
    assert blocks[-1].w_max[-1] == a.w_max and blocks[-1].w_max2[-1] == a.w_max2


def test_thinning_and_burn_in_indexing():
    full = np.concatenate([b.y for b in run_chain(P4, 1000, 0, 1, make_stream(2), block=1000)])
    thin = np.concatenate([b.y for b in run_chain(P4, 1000, 100, 7, make_stream(2), block=64)])
    assert np.array_equal(thin, full[100::7])
    assert thin.size == math.ceil(900 / 7)


def test_chain_configuration_errors():
    with pytest.raises(ConfigError):
        next(run_chain(P4, 100, 100, 1, make_stream(0)))
    with pytest.raises(ConfigError):
        next(run_chain(P4, 100, 0, 0, make_stream(0)))
    with pytest.raises(RegimeError):
        next(run_chain(AlphaParam(2.2, 100), 100, 0, 1, make_stream(0)))


def test_chain_invariants_after_burn_in():
    for b in run_chain(P4, 300_000, 1000, 1, make_stream(4)):
        assert np.all(b.w_max >= b.w_max2)
        assert np.all(b.y >= b.w_max**2 * (1 - 1e-12))
        assert np.all((b.y > 0) & (b.y <= 1))


def test_initial_state_is_forgotten():
    p = AlphaParam(1.2, 1000)
    ws = RhoSampler(p, make_stream(6)).sample(20_000)
    a, b = RecursionState(0.01, 0.1, 0.0), RecursionState(0.99, 0.995, 0.5)
    for w in ws:
        a, b = step(a, float(w)), step(b, float(w))
    assert abs(a.y - b.y) < 1e-6
    assert a.w_max == b.w_max and a.w_max2 == b.w_max2


def test_sampler_regime():
    with pytest.raises(RegimeError):
        RhoSampler(AlphaParam(2.5, 100), make_stream(0))
    with pytest.raises(RegimeError):
        sample_rho_weight(AlphaParam(0.9, 100), make_stream(0))


def test_sampler_is_independent_of_request_sizes():
    a = RhoSampler(P4, make_stream(1))
    parts = np.concatenate([a.sample(10), a.sample(70_000), a.sample(5)])
    b = RhoSampler(P4, make_stream(1)).sample(70_015)
    assert np.array_equal(parts, b)


def test_proposal_only_law():
    s = RhoSampler(P4, make_stream(2), accept=False)
    w = s.sample(200_000)
    eps, a = P4.eps_n, P4.alpha
    cdf = lambda x: (eps**-a - x**-a) / (eps**-a - 1.0)
    assert stats.kstest(w, cdf).pvalue > 0.01
    assert w.min() >= eps and w.max() <= 1.0


def _rho_cdf_table(p, m=3001):
    grid = np.geomspace(p.eps_n, 1.0, m)
    pieces = [an.law_integral("rho", p, lo=float(lo), hi=float(hi)) for lo, hi in zip(grid[:-1], grid[1:])]
    cum = np.concatenate([[0.0], np.cumsum(pieces)])
    return grid, cum / cum[-1]


def test_accepted_weights_follow_spectrum():
    s = RhoSampler(P4, make_stream(3))
    w = s.sample(10**6)
    grid, cdf = _rho_cdf_table(P4)
    f = lambda x: np.interp(np.log(x), np.log(grid), cdf)
    assert stats.kstest(w, f).pvalue > 0.01
    mass = an.law_integral("rho", P4)
    mean = an.law_integral("rho", P4, 1) / mass
    se = np.std(w) / math.sqrt(w.size)
    assert abs(np.mean(w) - mean) < 3 * se
    rate = rho_proposal_acceptance(P4)
    assert 0 < rate <= 1
    n = s.proposed
    assert abs(s.acceptance_rate - rate) < 3 * math.sqrt(rate * (1 - rate) / n) + 1e-9


def test_scalar_sampler_law():
    rng = make_stream(9)
    w = np.array([sample_rho_weight(P4, rng) for _ in range(20_000)])
    grid, cdf = _rho_cdf_table(P4, 1001)
    assert stats.kstest(w, lambda x: np.interp(np.log(x), np.log(grid), cdf)).pvalue > 0.01


def test_stationary_mean_of_y():
    # a stationary y satisfies E[y] = E[W^2] + E[(1-W)^2] E[y]
    p = AlphaParam(1.2, 1000)
    mass = an.law_integral("rho", p)
    m1, m2 = an.law_integral("rho", p, 1) / mass, an.law_integral("rho", p, 2) / mass
    target = m2 / (2 * m1 - m2)
    total, count = 0.0, 0
    for b in run_chain(p, 4 * 10**6, 10_000, 1, make_stream(10)):
        total += float(np.sum(b.y))
        count += b.y.size
    assert total / count == pytest.approx(target, rel=0.1)


def test_split_half_stationarity():
    p = AlphaParam(1.2, 1000)
    ys = np.concatenate([b.y for b in run_chain(p, 4 * 10**6, 10_000, 2000, make_stream(12))])
    half = ys.size // 2
    edges = np.quantile(ys, np.linspace(0, 1, 11))
    edges[0], edges[-1] = 0.0, 1.0
    a, _ = np.histogram(ys[:half], edges)
    b, _ = np.histogram(ys[half:2 * half], edges)
    assert stats.chi2_contingency(np.vstack([a, b]))[1] > 0.01


def test_chain_histograms_thread_independent():
    p = AlphaParam(1.2, 2000)
    g1 = chain_histograms(p, 50_000, 1000, seed=3, chains=3, threads=1)
    g3 = chain_histograms(p, 50_000, 1000, seed=3, chains=3, threads=3)
    for k in g1:
        assert np.array_equal(g1[k].counts, g3[k].counts)
        assert g1[k].total == 3 * 49_000
    grids = default_grids(p)
    assert set(grids) == {"w1", "w2", "y2", "ne"}
    assert all(g.total == 0 for g in grids.values())
