"""Pareto(alpha) populations, family weights and the observables Y_k, N_e, U_2."""
from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Iterable, Optional, Sequence

import numba
import numpy as np

from .errors import DomainError, RegimeError
from .special import beta
from .streams import make_stream


@dataclass(frozen=True)
class AlphaParam:
    """Tail index ``alpha`` and population size ``n`` with derived constants.

    ``mu`` is infinite for ``alpha <= 1``; ``c_n`` is defined for
    ``1 <= alpha < 2`` and ``eps_n`` whenever the mean is finite.
    """

    alpha: float
    n: int

    def __post_init__(self):
        if not (self.alpha > 0 and math.isfinite(self.alpha)):
            raise DomainError(f"alpha must be a positive finite number, got {self.alpha!r}")
        if int(self.n) != self.n or self.n < 2:
            raise DomainError(f"n must be an integer >= 2, got {self.n!r}")
        object.__setattr__(self, "alpha", float(self.alpha))
        object.__setattr__(self, "n", int(self.n))

    @property
    def finite_mean(self) -> bool:
        return self.alpha > 1.0

    @property
    def mu(self) -> float:
        if not self.finite_mean:
            return math.inf
        return self.alpha / (self.alpha - 1.0)

    @property
    def beta_norm(self) -> float:
        """Beta(2 - alpha, alpha), the normalizer of the weight spectrum."""
        if not 1.0 <= self.alpha < 2.0:
            raise RegimeError(f"Beta(2-alpha, alpha) normalizer needs 1 <= alpha < 2, got {self.alpha}")
        return beta(2.0 - self.alpha, self.alpha)

    @property
    def c_n(self) -> float:
        a = self.alpha
        if a == 1.0:
            return 1.0 / math.log(self.n)
        if 1.0 < a < 2.0:
            return a * self.beta_norm / (self.mu**a * self.n ** (a - 1.0))
        raise RegimeError(f"scaling constant c_N is defined for 1 <= alpha < 2, got {a}")

    @property
    def eps_n(self) -> float:
        """Small-weight cut-off 1/(mu N)."""
        self.require_finite_mean()
        return 1.0 / (self.mu * self.n)

    def require_finite_mean(self) -> None:
        if not self.finite_mean:
            raise RegimeError(f"operation needs a finite mean (alpha > 1), got alpha={self.alpha}")


def pareto_inverse_cdf(u, alpha: float):
    """Inverse of F(x) = 1 - x^(-alpha): returns (1 - u)^(-1/alpha) >= 1.

    Accepts a scalar or an array; ``u`` must lie in [0, 1).
    """
    if not alpha > 0:
        raise DomainError(f"alpha must be > 0, got {alpha!r}")
    arr = np.asarray(u, dtype=float)
    if np.any(~((arr >= 0.0) & (arr < 1.0))):
        raise DomainError("u must lie in [0, 1)")
    out = np.power(1.0 - arr, -1.0 / alpha)
    return float(out) if out.ndim == 0 else out


@dataclass
class PopulationDraw:
    """One realization of N reproductive-success variates and derived weights."""

    x: np.ndarray
    r_n: float
    x_sorted: np.ndarray
    w: np.ndarray
    y: dict = field(default_factory=dict)
    u2: float = math.nan

    @property
    def n(self) -> int:
        return self.x.size

    @property
    def w1(self) -> float:
        return self.x_sorted[0] / self.r_n

    @property
    def w2(self) -> float:
        return self.x_sorted[1] / self.r_n

    @property
    def ne(self) -> float:
        return 1.0 / self.y[2]


def _fsum_pow(w: np.ndarray, k: int) -> float:
    if k == 0:
        return float(w.size)
    if k == 1:
        return math.fsum(w)
    return math.fsum(w**k)


def compute_y(draw: PopulationDraw, k_list: Iterable[int]) -> dict:
    """Power sums Y_k = sum_i W_i^k, correctly rounded (``math.fsum``)."""
    out = {}
    for k in k_list:
        if int(k) != k or k < 0:
            raise DomainError(f"k must be a non-negative integer, got {k!r}")
        out[int(k)] = _fsum_pow(draw.w, int(k))
    return out


def compute_u2(draw: PopulationDraw) -> float:
    """Sum of squared weights of the N-1 lower order statistics, each
    normalized by their own sum R_{2,N}."""
    if draw.x_sorted.size < 2:
        raise DomainError("U_2 needs at least two variates")
    rest = draw.x_sorted[1:]
    r2 = math.fsum(rest)
    return math.fsum((rest / r2) ** 2)


def reconstruct_y2_from_parts(w1: float, u2: float) -> float:
    """Y_2 = W_1^2 + (1 - W_1)^2 U_2."""
    for name, v in (("w1", w1), ("u2", u2)):
        if not 0.0 <= v <= 1.0:
            raise DomainError(f"{name} must lie in [0, 1], got {v!r}")
    return w1 * w1 + (1.0 - w1) ** 2 * u2


def population_from_uniforms(params: AlphaParam, u, k_list: Sequence[int] = (0, 1, 2, 3)) -> PopulationDraw:
    u = np.asarray(u, dtype=float)
    if u.shape != (params.n,):
        raise DomainError(f"expected {params.n} uniforms, got shape {u.shape}")
    x = pareto_inverse_cdf(u, params.alpha)
    x = np.atleast_1d(x)
    r_n = math.fsum(x)
    draw = PopulationDraw(x=x, r_n=r_n, x_sorted=np.sort(x)[::-1], w=x / r_n)
    draw.y = compute_y(draw, k_list)
    draw.u2 = compute_u2(draw)
    return draw


def draw_population(params: AlphaParam, rng: np.random.Generator,
                    k_list: Sequence[int] = (0, 1, 2, 3)) -> PopulationDraw:
    """Draw N i.i.d. Pareto(alpha) variates from ``rng`` by inversion."""
    return population_from_uniforms(params, rng.random(params.n), k_list)


# ---------------------------------------------------------------------------
# Batched replicate statistics
#
# For large Monte Carlo runs only a handful of scalars per replicate are
# needed, so the variates are reduced in a single compensated pass instead
# of materializing a PopulationDraw.

@numba.njit(cache=True, nogil=True)
def _pareto_top2(u, inv_alpha, x):
    """Fill ``x`` with (1 - u)^(-1/alpha) and return the index of the maximum
    and the second-largest value."""
    imax = 0
    x1 = -1.0
    x2 = -1.0
    for i in range(u.size):
        v = (1.0 - u[i]) ** (-inv_alpha)
        x[i] = v
        if v > x1:
            x2 = x1
            x1 = v
            imax = i
        elif v > x2:
            x2 = v
    return imax, x2


@numba.njit(cache=True, nogil=True)
def _rest_sums(x, skip, want_y3):
    # Kahan-compensated sums of x, x^2, x^3 over all indices except ``skip``.
    s1 = 0.0
    c1 = 0.0
    s2 = 0.0
    c2 = 0.0
    s3 = 0.0
    c3 = 0.0
    for i in range(x.size):
        if i == skip:
            continue
        v = x[i]
        t = v - c1
        z = s1 + t
        c1 = (z - s1) - t
        s1 = z
        vv = v * v
        t = vv - c2
        z = s2 + t
        c2 = (z - s2) - t
        s2 = z
        if want_y3:
            t = vv * v - c3
            z = s3 + t
            c3 = (z - s3) - t
            s3 = z
    return s1, s2, s3


REPLICATE_FIELDS = ("r_n", "x1", "x2", "w1", "w2", "y2", "y3", "ne", "u2", "r2", "sum_sq_rest")


@dataclass
class ReplicateTable:
    """Per-replicate scalars from a batch of independent populations."""

    params: AlphaParam
    seed: int
    stream: int
    r_n: np.ndarray
    x1: np.ndarray
    x2: np.ndarray
    r2: np.ndarray
    sum_sq_rest: np.ndarray
    sum_cube_rest: np.ndarray

    def __len__(self) -> int:
        return self.r_n.size

    @property
    def w1(self) -> np.ndarray:
        return self.x1 / self.r_n

    @property
    def w2(self) -> np.ndarray:
        return self.x2 / self.r_n

    @property
    def u2(self) -> np.ndarray:
        return self.sum_sq_rest / self.r2**2

    @property
    def y2(self) -> np.ndarray:
        return (self.x1**2 + self.sum_sq_rest) / self.r_n**2

    @property
    def y3(self) -> np.ndarray:
        return (self.x1**3 + self.sum_cube_rest) / self.r_n**3

    @property
    def ne(self) -> np.ndarray:
        return 1.0 / self.y2

    def column(self, name: str) -> np.ndarray:
        if name not in REPLICATE_FIELDS:
            raise KeyError(name)
        return getattr(self, name)


def _replicate_stats(params: AlphaParam, seed: int, stream: int, index: int,
                     want_y3: bool, full_sort: bool):
    rng = make_stream(seed, stream, index)
    u = rng.random(params.n)
    x = np.empty_like(u)
    imax, x2 = _pareto_top2(u, 1.0 / params.alpha, x)
    x1 = x[imax]
    if full_sort:
        xs = np.sort(x)
        x1, x2 = xs[-1], xs[-2]
    r2, s2, s3 = _rest_sums(x, imax, want_y3)
    return x1, x2, r2, s2, s3


def simulate_replicates(params: AlphaParam, replicates: int, seed: int, stream: int = 0,
                        threads: int = 1, with_y3: bool = True, full_sort: bool = False,
                        chunk: int = 64) -> ReplicateTable:
    """Run ``replicates`` independent populations and keep per-replicate scalars.

    Replicate ``i`` draws from ``make_stream(seed, stream, i)``; results are
    stored by index, so the thread count never changes the output.
    """
    if replicates < 1:
        raise DomainError("replicates must be >= 1")
    out = np.empty((replicates, 5))

    def work(start):
        stop = min(start + chunk, replicates)
        for i in range(start, stop):
            out[i] = _replicate_stats(params, seed, stream, i, with_y3, full_sort)

    starts = range(0, replicates, chunk)
    if threads <= 1:
        for s in starts:
            work(s)
    else:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            list(pool.map(work, starts))
    x1, x2, r2, s2, s3 = out.T
    if not with_y3:
        s3 = np.full(replicates, np.nan)
    return ReplicateTable(params=params, seed=seed, stream=stream, r_n=x1 + r2,
                          x1=x1.copy(), x2=x2.copy(), r2=r2.copy(),
                          sum_sq_rest=s2.copy(), sum_cube_rest=s3.copy())


def accumulate_weights(params: AlphaParam, replicates: int, seed: int, grid, stream: int = 0,
                       rng_factory=make_stream) -> None:
    """Histogram every family weight W_i of ``replicates`` populations into ``grid``."""
    for i in range(replicates):
        rng = rng_factory(seed, stream, i)
        x = np.power(1.0 - rng.random(params.n), -1.0 / params.alpha)
        grid.accumulate_many(x / math.fsum(x))
