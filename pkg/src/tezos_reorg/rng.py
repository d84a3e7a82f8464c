"""Deterministic random substreams.

A run is identified by a 64-bit master seed. Every unit of parallel work
(a sampling chunk, a sweep cell) gets its own generator derived from the
master seed and an integer key path:

    master seed
      └── key path, e.g. (chunk,) or (ei, de, dp, target, chunk)
            └── PCG64 generator

Results therefore depend only on the seed and the key layout, never on how
many workers ran the chunks or in which order they finished.
"""

from __future__ import annotations

from typing import Sequence

import numpy as np


def substream(seed: int, *key: int) -> np.random.Generator:
    ss = np.random.SeedSequence(entropy=int(seed), spawn_key=tuple(int(k) for k in key))
    return np.random.Generator(np.random.PCG64(ss))


def derive_seed(seed: int, key: Sequence[int]) -> int:
    """Collapse ``(seed, key)`` into a fresh 64-bit seed."""
    ss = np.random.SeedSequence(entropy=int(seed), spawn_key=tuple(int(k) for k in key))
    return int(ss.generate_state(1, dtype=np.uint64)[0])


def chunk_plan(samples: int, chunk_size: int) -> list[int]:
    """Sizes of the consecutive chunks that make up ``samples`` draws."""
    if samples < 1:
        raise ValueError(f"samples must be >= 1, got {samples}")
    if chunk_size < 1:
        raise ValueError(f"chunk_size must be >= 1, got {chunk_size}")
    full, rest = divmod(samples, chunk_size)
    return [chunk_size] * full + ([rest] if rest else [])
