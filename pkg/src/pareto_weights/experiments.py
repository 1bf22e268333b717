"""Pipelines shared by the command line and the acceptance checks."""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Dict, Optional

import numpy as np

from . import analytic
from .sampling import AlphaParam, ReplicateTable
from .stats import BinnedCurve, HistogramGrid, binned_conditional, log_edges

# figure-1 panels: (panel, observable, abscissa name, analytic law)
FIGURE1_PANELS = (
    ("a", "w1", "w", "pi_w1"),
    ("b", "w2", "w", "pi_w2"),
    ("c", "y2", "y", "pi_y2"),
    ("d", "ne", "y", "pi_ne"),
)

_SUPPORT = {"pi_w1": (0.0, 1.0), "pi_w2": (0.0, 1.0), "pi_y2": (0.0, 1.0), "pi_ne": (1.0, math.inf)}


def replicate_histograms(table: ReplicateTable, grids: Dict[str, HistogramGrid]) -> Dict[str, HistogramGrid]:
    """Fill fresh copies of ``grids`` (keys w1, w2, y2, ne) from a replicate table."""
    out = {}
    for key, g in grids.items():
        h = HistogramGrid(g.edges.copy(), g.mode)
        h.accumulate_many(table.column(key))
        out[key] = h
    return out


def bin_averaged_law(law: str, params: AlphaParam, edges: np.ndarray) -> np.ndarray:
    """(1 / width) * integral of the law over each bin, clipped to its support."""
    s_lo, s_hi = _SUPPORT[law]
    out = np.zeros(edges.size - 1)
    for i, (lo, hi) in enumerate(zip(edges[:-1], edges[1:])):
        a, b = max(lo, s_lo), min(hi, s_hi)
        if b > a and a > 0.0:
            out[i] = analytic.law_integral(law, params, lo=float(a), hi=float(b)) / (hi - lo)
    return out


def bins_in_domain(law: str, params: AlphaParam, edges: np.ndarray) -> np.ndarray:
    """True for bins lying entirely inside the law's validity range."""
    lo, hi = analytic.law_domain(law, params)
    return (edges[:-1] >= lo) & (edges[1:] <= hi)


def law_at(law: str, params: AlphaParam, xs: np.ndarray) -> np.ndarray:
    return analytic.curve_table(law, params, np.asarray(xs, dtype=float)).fs


@dataclass
class Panel:
    """One figure-1 panel on a shared bin grid."""

    panel: str
    key: str
    abscissa: str
    law: str
    edges: np.ndarray
    x: np.ndarray
    empirical_density: np.ndarray
    chain_density: np.ndarray
    analytic: np.ndarray
    analytic_bin_avg: np.ndarray
    in_domain: np.ndarray

    def columns(self) -> tuple:
        header = [self.abscissa, "edge_lo", "edge_hi", "empirical_density", "chain_density",
                  f"analytic_{self.law}", f"analytic_{self.law}_bin_avg", "in_domain"]
        cols = [self.x, self.edges[:-1], self.edges[1:], self.empirical_density,
                self.chain_density, self.analytic, self.analytic_bin_avg, self.in_domain]
        return header, cols


def figure1_panels(params: AlphaParam, edges: Dict[str, np.ndarray],
                   empirical: Dict[str, np.ndarray], chain: Dict[str, np.ndarray]) -> list:
    """Assemble the four panels; missing empirical or chain densities are NaN."""
    panels = []
    for panel, key, absc, law in FIGURE1_PANELS:
        e = np.asarray(edges[key], dtype=float)
        centers = np.sqrt(e[:-1] * e[1:]) if e[0] > 0 else 0.5 * (e[:-1] + e[1:])
        nan = np.full(centers.size, np.nan)
        panels.append(Panel(
            panel=panel, key=key, abscissa=absc, law=law, edges=e, x=centers,
            empirical_density=np.asarray(empirical.get(key, nan), dtype=float),
            chain_density=np.asarray(chain.get(key, nan), dtype=float),
            analytic=law_at(law, params, centers),
            analytic_bin_avg=bin_averaged_law(law, params, e),
            in_domain=bins_in_domain(law, params, e),
        ))
    return panels


def recruitment_edges(r_scaled: np.ndarray, bins_per_decade: int = 10) -> np.ndarray:
    return log_edges(float(np.min(r_scaled)), float(np.max(r_scaled)) * (1 + 1e-12), bins_per_decade)


def figure2_curve(params: AlphaParam, r_n, y2, bins_per_decade: int = 10):
    """Binned Y_2 / c_N against R_N / (mu N), plus the recruitment curve
    (also divided by c_N) at each bin's mean abscissa."""
    p = params
    r_scaled = np.asarray(r_n, dtype=float) / (p.mu * p.n)
    edges = recruitment_edges(r_scaled, bins_per_decade)
    curve = binned_conditional(np.asarray(y2, dtype=float) / p.c_n, r_scaled, edges)
    sweep = np.full(curve.centers.size, np.nan)
    ok = ~curve.empty
    sweep[ok] = analytic.sweepstakes_curve(p, curve.centers[ok] * p.mu * p.n) / p.c_n
    return curve, sweep
