"""Histograms, binned conditional statistics and power-law fits."""
from __future__ import annotations

import bisect
import math
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from .errors import DomainError

LOW_CONFIDENCE_COUNT = 20


def log_edges(lo: float, hi: float, bins_per_decade: int = 10) -> np.ndarray:
    """Log-spaced edges aligned to 10^(j/bins_per_decade), covering [lo, hi].

    Grids built with the same ``bins_per_decade`` share edges wherever they
    overlap, so histograms from different runs can be merged.
    """
    if not (0 < lo < hi):
        raise DomainError("log_edges needs 0 < lo < hi")
    if bins_per_decade < 1:
        raise DomainError("bins_per_decade must be >= 1")
    j0 = math.floor(math.log10(lo) * bins_per_decade + 1e-9)
    j1 = math.ceil(math.log10(hi) * bins_per_decade - 1e-9)
    if j1 <= j0:
        j1 = j0 + 1
    return 10.0 ** (np.arange(j0, j1 + 1) / bins_per_decade)


def linear_edges(lo: float, hi: float, bins: int) -> np.ndarray:
    if not lo < hi or bins < 1:
        raise DomainError("linear_edges needs lo < hi and bins >= 1")
    return np.linspace(lo, hi, bins + 1)


@dataclass
class HistogramGrid:
    """Counts on left-closed bins [e_i, e_{i+1}) with under/overflow tallies.

    ``total`` counts every accumulated sample, in range or not, so the
    density integrates to the in-range fraction.
    """

    edges: np.ndarray
    mode: str = "log"
    counts: np.ndarray = None
    underflow: int = 0
    overflow: int = 0

    def __post_init__(self):
        self.edges = np.asarray(self.edges, dtype=float)
        if self.edges.ndim != 1 or self.edges.size < 2 or np.any(np.diff(self.edges) <= 0):
            raise DomainError("edges must be a strictly increasing 1-D array of length >= 2")
        if self.mode not in ("log", "linear"):
            raise DomainError(f"unknown histogram mode {self.mode!r}")
        if self.counts is None:
            self.counts = np.zeros(self.edges.size - 1, dtype=np.int64)
        else:
            self.counts = np.asarray(self.counts, dtype=np.int64)

    @classmethod
    def log(cls, lo: float, hi: float, bins_per_decade: int = 10) -> "HistogramGrid":
        return cls(log_edges(lo, hi, bins_per_decade), mode="log")

    @classmethod
    def linear(cls, lo: float, hi: float, bins: int) -> "HistogramGrid":
        return cls(linear_edges(lo, hi, bins), mode="linear")

    @property
    def total(self) -> int:
        return int(self.counts.sum()) + self.underflow + self.overflow

    @property
    def widths(self) -> np.ndarray:
        return np.diff(self.edges)

    @property
    def centers(self) -> np.ndarray:
        """Geometric centers for log grids, arithmetic for linear ones."""
        if self.mode == "log":
            return np.sqrt(self.edges[:-1] * self.edges[1:])
        return 0.5 * (self.edges[:-1] + self.edges[1:])

    @property
    def density(self) -> np.ndarray:
        total = self.total
        if total == 0:
            return np.zeros_like(self.widths)
        return self.counts / (total * self.widths)

    def accumulate(self, sample: float) -> "HistogramGrid":
        if math.isnan(sample):
            raise DomainError("cannot accumulate NaN")
        if sample < self.edges[0]:
            self.underflow += 1
        elif sample >= self.edges[-1]:
            self.overflow += 1
        else:
            self.counts[bisect.bisect_right(self.edges, sample) - 1] += 1
        return self

    def accumulate_many(self, samples) -> "HistogramGrid":
        x = np.asarray(samples, dtype=float).ravel()
        if np.isnan(x).any():
            raise DomainError("cannot accumulate NaN")
        idx = np.searchsorted(self.edges, x, side="right") - 1
        self.underflow += int(np.count_nonzero(idx < 0))
        self.overflow += int(np.count_nonzero(idx >= self.counts.size))
        inside = idx[(idx >= 0) & (idx < self.counts.size)]
        self.counts += np.bincount(inside, minlength=self.counts.size)
        return self

    def merge(self, other: "HistogramGrid") -> "HistogramGrid":
        if self.edges.shape != other.edges.shape or not np.array_equal(self.edges, other.edges):
            raise DomainError("cannot merge histograms with different edges")
        return HistogramGrid(self.edges.copy(), self.mode, self.counts + other.counts,
                             self.underflow + other.underflow, self.overflow + other.overflow)

    def copy(self) -> "HistogramGrid":
        return HistogramGrid(self.edges.copy(), self.mode, self.counts.copy(), self.underflow, self.overflow)


def accumulate(grid: HistogramGrid, sample: float) -> HistogramGrid:
    return grid.accumulate(sample)


def empirical_mode(grid: HistogramGrid, per: str = "linear", min_samples: int = 1000) -> float:
    """Center of the bin with the largest density; ties go to the smaller abscissa.

    ``per="linear"`` ranks bins by counts per unit abscissa, which is the peak of
    the density curve Pi(x) however the axes are drawn. ``per="log"`` ranks by
    counts per decade, i.e. the peak of x * Pi(x).
    """
    n_in = int(grid.counts.sum())
    if n_in == 0:
        raise DomainError("empty histogram has no mode")
    if grid.total < min_samples:
        raise DomainError(f"mode estimate needs >= {min_samples} samples, got {grid.total}")
    if per == "linear":
        score = grid.counts / grid.widths
    elif per == "log":
        score = grid.counts / np.log(grid.edges[1:] / grid.edges[:-1])
    else:
        raise DomainError(f"unknown density measure {per!r}")
    return float(grid.centers[int(np.argmax(score))])


def nearest_rank_quantile(sorted_values: np.ndarray, q: float) -> float:
    """Nearest-rank quantile of an ascending array: the ceil(q n)-th order statistic."""
    n = sorted_values.size
    if n == 0:
        return math.nan
    if not 0.0 <= q <= 1.0:
        raise DomainError("q must lie in [0, 1]")
    rank = max(1, math.ceil(q * n - 1e-12))
    return float(sorted_values[min(rank, n) - 1])


@dataclass
class BinnedCurve:
    """Per-bin mean and central 95% range of a response against a covariate.

    ``centers`` is the mean covariate of the samples in each bin (where the
    binned point is drawn); empty bins carry NaN and ``count == 0``.
    """

    edges: np.ndarray
    centers: np.ndarray
    counts: np.ndarray
    mean: np.ndarray
    q_lo: np.ndarray
    q_hi: np.ndarray
    q_levels: tuple = (0.025, 0.975)

    @property
    def low_confidence(self) -> np.ndarray:
        return self.counts < LOW_CONFIDENCE_COUNT

    @property
    def empty(self) -> np.ndarray:
        return self.counts == 0


def binned_conditional(response, covariate, edges, q_levels=(0.025, 0.975)) -> BinnedCurve:
    """Bin ``response`` by ``covariate`` on ``edges`` (left-closed bins)."""
    y = np.asarray(response, dtype=float)
    x = np.asarray(covariate, dtype=float)
    if y.shape != x.shape:
        raise DomainError("response and covariate must have the same length")
    edges = np.asarray(edges, dtype=float)
    nb = edges.size - 1
    idx = np.searchsorted(edges, x, side="right") - 1
    centers = np.full(nb, np.nan)
    mean = np.full(nb, np.nan)
    q_lo = np.full(nb, np.nan)
    q_hi = np.full(nb, np.nan)
    counts = np.zeros(nb, dtype=np.int64)
    for b in range(nb):
        sel = idx == b
        m = int(np.count_nonzero(sel))
        counts[b] = m
        if m == 0:
            continue
        yb = np.sort(y[sel])
        centers[b] = float(np.mean(x[sel]))
        # shifted compensated mean: exact for constant bins
        mean[b] = float(yb[0] + math.fsum(yb - yb[0]) / m)
        q_lo[b] = nearest_rank_quantile(yb, q_levels[0])
        q_hi[b] = nearest_rank_quantile(yb, q_levels[1])
    return BinnedCurve(edges, centers, counts, mean, q_lo, q_hi, tuple(q_levels))


@dataclass
class ScalingFit:
    slope: float
    intercept: float
    slope_stderr: float
    r2: float
    log_n: np.ndarray
    log_stat: np.ndarray


def fit_power_law(points: Sequence[tuple]) -> ScalingFit:
    """OLS of ln(statistic) on ln(n); standard error from the residual variance."""
    pts = list(points)
    if len(pts) < 3:
        raise DomainError("a power-law fit needs at least 3 points")
    n = np.array([p[0] for p in pts], dtype=float)
    s = np.array([p[1] for p in pts], dtype=float)
    if np.any(n <= 0) or np.any(s <= 0):
        raise DomainError("power-law fit needs positive n and statistic values")
    lx, ly = np.log(n), np.log(s)
    xm, ym = lx.mean(), ly.mean()
    sxx = float(np.sum((lx - xm) ** 2))
    if sxx == 0:
        raise DomainError("power-law fit needs at least two distinct n values")
    slope = float(np.sum((lx - xm) * (ly - ym)) / sxx)
    intercept = float(ym - slope * xm)
    resid = ly - (intercept + slope * lx)
    ssr = float(np.sum(resid**2))
    sst = float(np.sum((ly - ym) ** 2))
    stderr = math.sqrt(ssr / (lx.size - 2) / sxx)
    r2 = 1.0 - ssr / sst if sst > 0 else 1.0
    return ScalingFit(slope, intercept, stderr, r2, lx, ly)
