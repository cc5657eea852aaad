"""Seed-derived random streams.

Every random quantity in the package is drawn from a Philox (counter-based)
generator keyed by ``(seed, *key)``. Streams for different keys are
statistically independent, so work can be split across threads or reordered
without changing any result.
"""

from __future__ import annotations

import numpy as np

_MASK64 = (1 << 64) - 1


def stream(seed: int, *key: int) -> np.random.Generator:
    """Return the generator for stream ``key`` under the 64-bit ``seed``."""
    ss = np.random.SeedSequence(int(seed) & _MASK64, spawn_key=tuple(int(k) for k in key))
    return np.random.Generator(np.random.Philox(ss))


def derive_seed(seed: int, *key: int) -> int:
    """Derive a child 64-bit seed, e.g. for a nested bootstrap."""
    ss = np.random.SeedSequence(int(seed) & _MASK64, spawn_key=tuple(int(k) for k in key))
    return int(ss.generate_state(1, dtype=np.uint64)[0])
