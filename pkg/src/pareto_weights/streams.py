"""Deterministic, independent random streams.

Every stream is a PCG64 generator seeded from ``SeedSequence(seed,
spawn_key=ids)``, so a replicate's draws depend only on the root seed and
its integer ids (sub-run index, replicate index, ...), never on scheduling.
"""
from __future__ import annotations

import numpy as np

DEFAULT_SEED = 20180101


def make_stream(seed: int, *ids: int) -> np.random.Generator:
    if seed < 0:
        raise ValueError("seed must be non-negative")
    ss = np.random.SeedSequence(entropy=int(seed), spawn_key=tuple(int(i) for i in ids))
    return np.random.Generator(np.random.PCG64(ss))
