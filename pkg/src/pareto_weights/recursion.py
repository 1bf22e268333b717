"""Iterated insertion sampler for the largest weights and Y_2.

Each step adds one family of weight W drawn from the spectrum rho(w)/N on
[eps_N, 1] and shrinks every existing weight by (1 - W):

    y'      = W^2 + (1 - W)^2 y
    w_max'  = max(W, (1 - W) w_max)
    w_max2' = max(min(W, (1 - W) w_max), (1 - W) w_max2)

The iterates of (y, 1/y, w_max, w_max2) are then histogrammed as samples of
the stationary laws of Y_2, N_e, W_1 and W_2.
"""
from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, replace
from typing import Dict, Iterator, Optional

import numba
import numpy as np

from .errors import ConfigError, DomainError, RegimeError
from .sampling import AlphaParam
from .stats import HistogramGrid
from .streams import make_stream

CHAIN_COLUMNS = ("y", "ne", "w_max", "w_max2")


@dataclass(frozen=True)
class RecursionState:
    y: float
    w_max: float
    w_max2: float
    step: int = 0

    def __post_init__(self):
        if not (0.0 <= self.w_max2 <= self.w_max <= 1.0 and 0.0 <= self.y <= 1.0):
            raise DomainError(f"invalid recursion state {self}")

    @classmethod
    def initial(cls, rng: np.random.Generator) -> "RecursionState":
        y0 = float(rng.random())
        return cls(y=y0, w_max=math.sqrt(y0), w_max2=0.0, step=0)


def step(state: RecursionState, w: float) -> RecursionState:
    """Advance all three recursions with the same new weight ``w``."""
    if not 0.0 <= w <= 1.0:
        raise DomainError(f"weight must lie in [0, 1], got {w}")
    shrink = 1.0 - w
    y = w * w + shrink * shrink * state.y
    w_max = max(w, shrink * state.w_max)
    w_max2 = max(min(w, shrink * state.w_max), shrink * state.w_max2)
    return RecursionState(y=min(y, 1.0), w_max=w_max, w_max2=w_max2, step=state.step + 1)


# ---------------------------------------------------------------------------
# Sampling from rho(w) / N

class RhoSampler:
    """Rejection sampler for rho(w)/N on [eps_N, 1], 1 < alpha < 2.

    Proposals come from the truncated Pareto density proportional to
    w^(-alpha-1) on [eps_N, 1] and are accepted with probability
    (1 - w)^(alpha - 1). Proposals are generated in fixed blocks, so the
    output stream depends only on the generator, not on request sizes.
    """

    block = 1 << 16

    def __init__(self, params: AlphaParam, rng: np.random.Generator, accept: bool = True):
        if not 1.0 < params.alpha < 2.0:
            raise RegimeError(f"rho sampler needs 1 < alpha < 2, got {params.alpha}")
        self.params = params
        self.rng = rng
        self.accept = accept
        self._a = params.alpha
        self._top = params.eps_n ** (-params.alpha)
        self._buf = np.empty(0)
        self.proposed = 0
        self.accepted = 0

    @property
    def acceptance_rate(self) -> float:
        return self.accepted / self.proposed if self.proposed else math.nan

    def _refill(self) -> np.ndarray:
        u = self.rng.random(self.block)
        v = self.rng.random(self.block)
        w = (self._top - u * (self._top - 1.0)) ** (-1.0 / self._a)
        if self.accept:
            w = w[v < (1.0 - w) ** (self._a - 1.0)]
        self.proposed += self.block
        self.accepted += w.size
        return w

    def sample(self, size: int) -> np.ndarray:
        parts = [self._buf]
        have = self._buf.size
        while have < size:
            nxt = self._refill()
            parts.append(nxt)
            have += nxt.size
        pool = np.concatenate(parts) if len(parts) > 1 else self._buf
        out, self._buf = pool[:size], pool[size:]
        return out

    def __call__(self) -> float:
        return float(self.sample(1)[0])


def sample_rho_weight(params: AlphaParam, rng: np.random.Generator) -> float:
    """One draw from rho(w)/N using the same rejection rule, scalar version."""
    if not 1.0 < params.alpha < 2.0:
        raise RegimeError(f"rho sampler needs 1 < alpha < 2, got {params.alpha}")
    a = params.alpha
    top = params.eps_n ** (-a)
    while True:
        w = (top - rng.random() * (top - 1.0)) ** (-1.0 / a)
        if rng.random() < (1.0 - w) ** (a - 1.0):
            return w


def rho_proposal_acceptance(params: AlphaParam) -> float:
    """Expected acceptance: (int rho) / (mass of the c_N w^(-a-1)/B proposal)."""
    a = params.alpha
    proposal_mass = params.c_n / params.beta_norm * (params.eps_n ** (-a) - 1.0) / a
    from .analytic import law_integral
    return law_integral("rho", params) / proposal_mass


# ---------------------------------------------------------------------------
# Chains

@numba.njit(cache=True)
def _scan(ws, y, w1, w2, out_y, out_w1, out_w2):
    for i in range(ws.size):
        w = ws[i]
        s = 1.0 - w
        y = w * w + s * s * y
        a = s * w1
        b = s * w2
        if w > a:
            w2 = a if a > b else b
            w1 = w
        else:
            w1 = a
            w2 = w if w > b else b
        out_y[i] = y
        out_w1[i] = w1
        out_w2[i] = w2
    return y, w1, w2


@dataclass
class ChainBlock:
    """A slice of post-burn-in, thinned iterates."""

    y: np.ndarray
    w_max: np.ndarray
    w_max2: np.ndarray

    @property
    def ne(self) -> np.ndarray:
        return 1.0 / self.y

    def column(self, name: str) -> np.ndarray:
        """Coordinate by name; ``w1``/``w2``/``y2`` alias ``w_max``/``w_max2``/``y``."""
        name = _ALIASES.get(name, name)
        return self.ne if name == "ne" else getattr(self, name)


_ALIASES = {"w1": "w_max", "w2": "w_max2", "y2": "y"}


def run_chain(params: AlphaParam, iterations: int, burn_in: int = 10_000, thinning: int = 1,
              rng: Optional[np.random.Generator] = None, block: int = 1 << 20,
              state: Optional[RecursionState] = None) -> Iterator[ChainBlock]:
    """Yield the chain in blocks; ``iterations`` counts burn-in steps too.

    Kept iterates are those with step index t > burn_in and
    (t - burn_in - 1) divisible by ``thinning``.
    """
    if not 1.0 < params.alpha < 2.0:
        raise RegimeError(f"recursion needs 1 < alpha < 2, got {params.alpha}")
    if iterations < 1 or burn_in < 0 or thinning < 1:
        raise ConfigError("need iterations >= 1, burn_in >= 0, thinning >= 1")
    if burn_in >= iterations:
        raise ConfigError(f"burn_in ({burn_in}) must be smaller than iterations ({iterations})")
    rng = make_stream(0) if rng is None else rng
    st = RecursionState.initial(rng) if state is None else state
    sampler = RhoSampler(params, rng)
    y, w1, w2 = st.y, st.w_max, st.w_max2
    t = 0
    while t < iterations:
        m = min(block, iterations - t)
        ws = sampler.sample(m)
        oy, o1, o2 = np.empty(m), np.empty(m), np.empty(m)
        y, w1, w2 = _scan(ws, y, w1, w2, oy, o1, o2)
        # global step indices of this block are t+1 .. t+m
        first = max(burn_in + 1, t + 1)
        off = (-(first - burn_in - 1)) % thinning
        start = first - (t + 1) + off
        if start < m:
            sl = slice(start, m, thinning)
            yield ChainBlock(oy[sl], o1[sl], o2[sl])
        t += m


def chain_final_state(params: AlphaParam, iterations: int, rng: np.random.Generator) -> RecursionState:
    """State after ``iterations`` steps, computed by scalar stepping."""
    st = RecursionState.initial(rng)
    sampler = RhoSampler(params, rng)
    for w in sampler.sample(iterations):
        st = step(st, float(w))
    return st


def default_grids(params: AlphaParam, bins_per_decade: int = 10,
                  linear_bins: Optional[int] = None) -> Dict[str, HistogramGrid]:
    """Shared histogram grids for W_1, W_2, Y_2 and N_e, covering their full ranges."""
    n = params.n
    lo = 0.1 / (params.mu * n)
    ne_hi = 10.0 * params.mu**2 * n ** (2.0 * (1.0 - 1.0 / params.alpha))
    if linear_bins:
        return {
            "w1": HistogramGrid.linear(0.0, 1.0, linear_bins),
            "w2": HistogramGrid.linear(0.0, 0.5, linear_bins),
            "y2": HistogramGrid.linear(0.0, 1.0, linear_bins),
            "ne": HistogramGrid.linear(1.0, ne_hi, linear_bins),
        }
    return {
        "w1": HistogramGrid.log(lo, 1.0, bins_per_decade),
        "w2": HistogramGrid.log(lo, 1.0, bins_per_decade),
        "y2": HistogramGrid.log(lo * lo, 1.0, bins_per_decade),
        "ne": HistogramGrid.log(1.0, ne_hi, bins_per_decade),
    }


def chain_stream(seed: int, stream: int, index: int) -> np.random.Generator:
    """Generator for chain ``index``; disjoint from the population streams."""
    return make_stream(seed, 1, stream, index)


def _one_chain(params, iterations, burn_in, thinning, seed, stream, index, grids):
    rng = chain_stream(seed, stream, index)
    local = {k: g.copy() for k, g in grids.items()}
    for blk in run_chain(params, iterations, burn_in, thinning, rng):
        for name, g in local.items():
            g.accumulate_many(blk.column(name))
    return local


def chain_histograms(params: AlphaParam, iterations: int, burn_in: int = 10_000,
                     thinning: int = 1, seed: int = 0, stream: int = 0, chains: int = 1,
                     threads: int = 1, grids: Optional[Dict[str, HistogramGrid]] = None
                     ) -> Dict[str, HistogramGrid]:
    """Histogram ``chains`` independent chains and merge them in index order.

    Chain ``i`` uses ``chain_stream(seed, stream, i)``. ``grids`` are templates
    and are not modified.
    """
    if chains < 1:
        raise ConfigError("chains must be >= 1")
    grids = default_grids(params) if grids is None else grids
    empty = {k: g.copy() for k, g in grids.items()}
    for g in empty.values():
        g.counts[:] = 0
        g.underflow = g.overflow = 0
    args = [(params, iterations, burn_in, thinning, seed, stream, i, empty) for i in range(chains)]
    if threads <= 1 or chains == 1:
        results = [_one_chain(*a) for a in args]
    else:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            results = list(pool.map(lambda a: _one_chain(*a), args))
    merged = results[0]
    for r in results[1:]:
        merged = {k: merged[k].merge(r[k]) for k in merged}
    return merged
