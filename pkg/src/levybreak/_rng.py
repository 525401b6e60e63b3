"""Seed splitting.

Every random stream is derived from a master seed and a tuple of integer keys
via :class:`numpy.random.SeedSequence` (``entropy=master``, ``spawn_key=keys``).
Streams for distinct key tuples are statistically independent, and a stream
depends only on ``(master, keys)``, never on the order in which streams are
created.  This is what makes parallel replicates schedule-invariant.
"""

from __future__ import annotations

import numpy as np

MAX_SEED = 2**64 - 1


def check_seed(seed: int) -> int:
    seed = int(seed)
    if not 0 <= seed <= MAX_SEED:
        raise ValueError(f"seed must be an unsigned 64-bit integer, got {seed}")
    return seed


def stream(master: int, *keys: int) -> np.random.Generator:
    ss = np.random.SeedSequence(check_seed(master), spawn_key=tuple(int(k) for k in keys))
    return np.random.Generator(np.random.PCG64(ss))


def derive_seed(master: int, *keys: int) -> int:
    """A 64-bit seed for the stream ``(master, *keys)``."""
    ss = np.random.SeedSequence(check_seed(master), spawn_key=tuple(int(k) for k in keys))
    return int(ss.generate_state(1, dtype=np.uint64)[0])
