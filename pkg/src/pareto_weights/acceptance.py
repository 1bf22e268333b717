"""Acceptance checks at desk scale.

Each ``criterion_*`` function returns a :class:`CriterionResult` made of
individual :class:`Check` rows. Simulation outputs shared between criteria
are cached per process.
"""
from __future__ import annotations

import functools
import math
import tempfile
import time
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable, Dict, List, Optional, Sequence

import numpy as np

from . import analytic
from .experiments import (FIGURE1_PANELS, bin_averaged_law, bins_in_domain, figure2_curve,
                          replicate_histograms)
from .recursion import chain_histograms, default_grids
from .sampling import AlphaParam, compute_u2, draw_population, reconstruct_y2_from_parts, simulate_replicates
from .stats import empirical_mode, fit_power_law
from .streams import DEFAULT_SEED, make_stream

MIN_BIN_COUNT = 100


@dataclass
class Check:
    name: str
    value: float
    target: float
    tolerance: float
    passed: bool
    note: str = ""

    def line(self) -> str:
        flag = "ok  " if self.passed else "FAIL"
        s = f"    [{flag}] {self.name}: value={self.value:.6g} target={self.target:.6g} tol={self.tolerance:g}"
        return s + (f" ({self.note})" if self.note else "")


@dataclass
class CriterionResult:
    cid: int
    title: str
    checks: List[Check] = field(default_factory=list)
    seconds: float = 0.0

    @property
    def passed(self) -> bool:
        return bool(self.checks) and all(c.passed for c in self.checks)

    def summary(self) -> str:
        n_ok = sum(c.passed for c in self.checks)
        return (f"criterion {self.cid} {'PASS' if self.passed else 'FAIL'}: {self.title} "
                f"[{n_ok}/{len(self.checks)} checks, {self.seconds:.1f}s]")

    def to_dict(self) -> dict:
        return {"criterion": self.cid, "title": self.title, "passed": self.passed,
                "seconds": round(self.seconds, 3),
                "checks": [c.__dict__ for c in self.checks]}


def rel_check(name, value, target, tol, note="") -> Check:
    dev = abs(value / target - 1.0)
    return Check(name, float(value), float(target), tol, bool(dev <= tol), note or f"rel dev {dev:.3g}")


def abs_check(name, value, target, tol, note="") -> Check:
    dev = abs(value - target)
    return Check(name, float(value), float(target), tol, bool(dev <= tol), note or f"abs dev {dev:.3g}")


def factor_check(name, value, target, factor) -> Check:
    r = value / target
    return Check(name, float(value), float(target), factor,
                 bool(1.0 / factor <= r <= factor), f"ratio {r:.3g}")


# ---------------------------------------------------------------------------
# Cached shared data

@functools.lru_cache(maxsize=None)
def _mc(alpha: float, n: int, replicates: int, seed: int):
    return simulate_replicates(AlphaParam(alpha, n), replicates, seed, stream=n)


@functools.lru_cache(maxsize=None)
def _chain(alpha: float, n: int, iterations: int, seed: int, burn_in: int = 10_000):
    p = AlphaParam(alpha, n)
    return chain_histograms(p, iterations, burn_in=burn_in, seed=seed, stream=n,
                            grids=default_grids(p))


# ---------------------------------------------------------------------------
# Criteria

def criterion_1(seed: int = DEFAULT_SEED) -> CriterionResult:
    res = CriterionResult(1, "exact identities to 1e-12")
    p = AlphaParam(1.2, 10_000)
    draw = draw_population(p, make_stream(seed, 99, 0), k_list=(1, 2))
    res.checks.append(abs_check("sum of weights", math.fsum(draw.w), 1.0, 1e-12))
    res.checks.append(abs_check("Y_1", draw.y[1], 1.0, 1e-12))
    y2_rec = reconstruct_y2_from_parts(draw.w1, compute_u2(draw))
    res.checks.append(rel_check("Y_2 from W_1 and U_2", y2_rec, draw.y[2], 1e-12))
    lo, _ = analytic.law_domain("pi_y2", p)
    ys = np.geomspace(lo, 0.999, 400)
    lhs = analytic.pi_y2(p, ys)
    rhs = analytic.pi_w1(p, np.sqrt(ys)) / (2.0 * np.sqrt(ys))
    res.checks.append(abs_check("pi_y2(y) vs pi_w1(sqrt y)/(2 sqrt y), max rel dev",
                                float(np.max(np.abs(lhs / rhs - 1.0))), 0.0, 1e-12))
    ne = np.geomspace(1.001, analytic.law_domain("pi_ne", p)[1], 400)
    lhs = analytic.pi_ne(p, ne)
    rhs = analytic.pi_y2(p, 1.0 / ne) / ne**2
    res.checks.append(abs_check("pi_ne(y) vs pi_y2(1/y)/y^2, max rel dev",
                                float(np.max(np.abs(lhs / rhs - 1.0))), 0.0, 1e-12))
    for a in (1.2, 1.5, 1.8):
        q = AlphaParam(a, 10**6)
        res.checks.append(rel_check(f"E[Y_2]/c_N at alpha={a}", analytic.expected_yk(q, 2).value / q.c_n,
                                    1.0, 1e-12))
    return res


def criterion_2() -> CriterionResult:
    res = CriterionResult(2, "normalization of the laws at alpha=1.2, N=1e6")
    p = AlphaParam(1.2, 10**6)
    res.checks.append(rel_check("int rho / N", analytic.law_integral("rho", p) / p.n, 1.0, 0.01))
    res.checks.append(rel_check("int w rho", analytic.law_integral("rho", p, 1), 1.0, 0.01))
    res.checks.append(rel_check("int Pi_W1", analytic.law_integral("pi_w1", p), 1.0, 0.01))
    res.checks.append(rel_check("int Pi_Y2", analytic.law_integral("pi_y2", p), 1.0, 0.01))
    res.checks.append(rel_check("int y Pi_Y2 / c_N", analytic.law_integral("pi_y2", p, 1) / p.c_n, 1.0, 0.02))
    res.checks.append(rel_check("int Pi_Ne", analytic.law_integral("pi_ne", p), 1.0, 0.01))
    return res


def criterion_3(seed: int = DEFAULT_SEED, replicates: int = 10_000) -> CriterionResult:
    res = CriterionResult(3, "Monte Carlo E[Y_2], E[Y_3] at alpha=1.2, N=1e4")
    p = AlphaParam(1.2, 10_000)
    t = _mc(1.2, 10_000, replicates, seed)
    se2 = float(np.std(t.y2, ddof=1) / math.sqrt(len(t)) / p.c_n)
    res.checks.append(rel_check("mean Y_2 / c_N", float(np.mean(t.y2)) / p.c_n, 1.0, 0.10,
                                f"+- {se2:.3g} s.e."))
    target3 = analytic.expected_yk(p, 3).value
    res.checks.append(rel_check("mean Y_3 / (c_N (2-alpha)/2)", float(np.mean(t.y3)) / target3, 1.0, 0.15))
    return res


# The variance of Y_2 is carried by rare replicates with Y_2 = O(1), which occur
# with probability ~ c_N; R c_N >= 100 at every N keeps the sample CV from
# being biased low by missing them (c_N ~ 1.4e-3 at N = 1e5).
CV_REPLICATES = {1_000: 100_000, 10_000: 100_000, 100_000: 100_000}


def criterion_4(seed: int = DEFAULT_SEED) -> CriterionResult:
    res = CriterionResult(4, "CV[Y_2] scaling exponent at alpha=1.5")
    a = 1.5
    pts = []
    for n, reps in CV_REPLICATES.items():
        y2 = _mc(a, n, reps, seed).y2
        pts.append((n, float(np.std(y2, ddof=1) / np.mean(y2))))
    fit = fit_power_law(pts)
    res.checks.append(abs_check("Monte Carlo slope of ln CV vs ln N", fit.slope, (a - 1.0) / 2.0, 0.05,
                                f"stderr {fit.slope_stderr:.3g}"))
    top = [(n, analytic.cv_y2(AlphaParam(a, n))) for n in (10**4, 10**5, 10**6)]
    res.checks.append(abs_check("analytic cv_y2 slope", fit_power_law(top).slope, 0.25, 0.02))
    return res


def _fig1_comparisons(p: AlphaParam, mc: dict, chain: dict) -> List[Check]:
    checks = []
    for _, key, _, law in FIGURE1_PANELS:
        e = mc[key].edges
        inside = bins_in_domain(law, p, e)
        exact = bin_averaged_law(law, p, e)
        pairs = (
            ("chain vs Monte Carlo", chain[key].density, mc[key].density,
             np.minimum(chain[key].counts, mc[key].counts)),
            ("chain vs analytic", chain[key].density, exact, chain[key].counts),
            ("Monte Carlo vs analytic", mc[key].density, exact, mc[key].counts),
        )
        for label, num, den, counts in pairs:
            sel = inside & (counts >= MIN_BIN_COUNT) & (den > 0)
            if not np.any(sel):
                checks.append(Check(f"{key}: {label}", math.nan, 1.0, 0.25, False, "no qualifying bins"))
                continue
            ratio = num[sel] / den[sel]
            worst = float(ratio[np.argmax(np.abs(ratio - 1.0))])
            checks.append(Check(f"{key}: {label}, worst bin ratio", worst, 1.0, 0.25,
                                bool(np.all(np.abs(ratio - 1.0) <= 0.25)),
                                f"{int(np.sum(np.abs(ratio - 1.0) <= 0.25))}/{int(sel.sum())} bins within"))
    return checks


def criterion_5(seed: int = DEFAULT_SEED, iterations: int = 10**7, replicates: int = 10_000) -> CriterionResult:
    res = CriterionResult(5, "largest weights, Y_2, N_e: chain vs Monte Carlo vs analytic laws")
    p = AlphaParam(1.2, 10_000)
    chain = _chain(1.2, 10_000, iterations, seed)
    mc = replicate_histograms(_mc(1.2, 10_000, replicates, seed), default_grids(p))
    res.checks.extend(_fig1_comparisons(p, mc, chain))
    return res


def criterion_6(seed: int = DEFAULT_SEED) -> CriterionResult:
    res = CriterionResult(6, "modes of the N_e and Y_2 chains")
    a = 1.2
    c4 = _chain(a, 10_000, 10**7, seed)
    c5 = _chain(a, 100_000, 10**8, seed)
    m4 = empirical_mode(c4["ne"])
    m5 = empirical_mode(c5["ne"])
    res.checks.append(factor_check("N_e chain mode, N=1e4", m4, analytic.ne_mode(a), 2.0))
    p = AlphaParam(a, 10_000)
    res.checks.append(factor_check("Y_2 chain mode, N=1e4", empirical_mode(c4["y2"]),
                                   p.n ** (2.0 * (1.0 / a - 1.0)) / p.mu**2, 3.0))
    res.checks.append(factor_check("N_e mode ratio N=1e5 / N=1e4", m5 / m4, 1.0, 1.5))
    return res


def criterion_7(seed: int = DEFAULT_SEED, replicates: int = 10_000, typical_replicates: int = 1_000) -> CriterionResult:
    res = CriterionResult(7, "recruitment curve and typical Y_2")
    t = _mc(1.2, 100_000, replicates, seed)
    curve, sweep = figure2_curve(t.params, t.r_n, t.y2)
    sel = curve.counts >= MIN_BIN_COUNT
    inside = (sweep >= curve.q_lo) & (sweep <= curve.q_hi)
    res.checks.append(Check("curve inside the binned 95% band, bins with >= 100 samples",
                            float(np.sum(inside & sel)), float(np.sum(sel)), 0.0,
                            bool(np.any(sel) and np.all(inside[sel]))))
    p6 = AlphaParam(1.2, 10**6)
    t6 = _mc(1.2, 10**6, typical_replicates, seed)
    med = float(np.median(t6.y2 / p6.c_n))
    res.checks.append(abs_check("log10 median Y_2/c_N at N=1e6", math.log10(med),
                                math.log10(analytic.typical_y2_over_cn_scaling(p6)), 0.5))
    return res


def criterion_8(seed: int = DEFAULT_SEED, replicates: int = 100_000) -> CriterionResult:
    res = CriterionResult(8, "order statistics at alpha=1.5")
    p = AlphaParam(1.5, 1_000)
    m = analytic.order_stat_moments(p)
    res.checks.append(rel_check("E[X_2]/E[X_1] vs (alpha-1)/alpha", m.e_x2 / m.e_x1, (p.alpha - 1) / p.alpha, 1e-12))
    t = _mc(1.5, 1_000, replicates, seed)
    res.checks.append(rel_check("Monte Carlo E[X_2]", float(np.mean(t.x2)), m.e_x2, 0.05))
    res.checks.append(rel_check("Monte Carlo E[X_2^2]", float(np.mean(t.x2**2)), m.e_x2_sq, 0.05))
    return res


def criterion_9(seed: int = DEFAULT_SEED) -> CriterionResult:
    res = CriterionResult(9, "byte-identical outputs across 1, 2 and 8 threads")
    from .cli import main
    digests = {}
    with tempfile.TemporaryDirectory() as tmp:
        for threads in (1, 2, 8):
            for cmd, extra in (("simulate", ["--replicates", "300"]),
                               ("recursion", ["--iterations", "200000", "--burn-in", "1000", "--chains", "4"])):
                out = Path(tmp) / f"{cmd}_{threads}"
                main([cmd, "--alpha", "1.2", "--n", "1000", "--n", "2000", "--seed", str(seed),
                      "--threads", str(threads), "--out", str(out)] + extra)
                digests[(cmd, threads)] = {f.relative_to(out).as_posix(): f.read_bytes()
                                           for f in sorted(out.rglob("*.csv"))}
    for cmd in ("simulate", "recursion"):
        base = digests[(cmd, 1)]
        for threads in (2, 8):
            same = digests[(cmd, threads)] == base
            res.checks.append(Check(f"{cmd}: {len(base)} CSV files, 1 vs {threads} threads",
                                    float(same), 1.0, 0.0, bool(same and base)))
    return res


CRITERIA: Dict[int, Callable[..., CriterionResult]] = {
    1: criterion_1, 2: criterion_2, 3: criterion_3, 4: criterion_4, 5: criterion_5,
    6: criterion_6, 7: criterion_7, 8: criterion_8, 9: criterion_9,
}


def run_criterion(cid: int, **kwargs) -> CriterionResult:
    t0 = time.perf_counter()
    res = CRITERIA[cid](**kwargs)
    res.seconds = time.perf_counter() - t0
    return res


def run_all(ids: Optional[Sequence[int]] = None, seed: int = DEFAULT_SEED) -> List[CriterionResult]:
    ids = sorted(CRITERIA) if ids is None else list(ids)
    return [run_criterion(i, **({"seed": seed} if i != 2 else {})) for i in ids]
