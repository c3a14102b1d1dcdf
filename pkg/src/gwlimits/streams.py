"""Counter-based random streams keyed by (master seed, labels...).

Every stream is a Philox generator whose key is derived from the master seed
and an integer path, so a stream depends only on its labels and never on
which worker draws it or in what order.
"""

from __future__ import annotations

import zlib

import numpy as np


def label(name: str) -> int:
    """Stable 32-bit integer for a string label."""
    return zlib.crc32(name.encode("utf-8"))


def substream(seed: int, *key) -> np.random.Generator:
    path = tuple(label(k) if isinstance(k, str) else int(k) for k in key)
    return np.random.Generator(np.random.Philox(np.random.SeedSequence(int(seed), spawn_key=path)))


def blocks(reps: int, block_size: int):
    """Fixed partition of range(reps) into (index, start, stop) blocks."""
    return [(i, s, min(s + block_size, reps)) for i, s in enumerate(range(0, reps, block_size))]
