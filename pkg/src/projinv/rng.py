"""Seed splitting.

Every random stream is addressed by ``(seed, *path)``, so independent
trials can be generated in any order (or in parallel) and still reproduce
bit-for-bit.  Philox is a counter-based generator, which makes the
addressing cheap.
"""

from __future__ import annotations

import zlib

import numpy as np


def _key(part: int | str) -> int:
    if isinstance(part, str):
        return zlib.crc32(part.encode())
    return int(part)


def stream(seed: int, *path: int | str) -> np.random.Generator:
    """Generator for the sub-stream ``path`` of ``seed``."""
    if seed < 0:
        raise ValueError("seed must be nonnegative")
    ss = np.random.SeedSequence([int(seed), *(_key(p) for p in path)])
    return np.random.Generator(np.random.Philox(ss))


def as_generator(rng: int | np.random.Generator) -> np.random.Generator:
    if isinstance(rng, np.random.Generator):
        return rng
    return stream(int(rng))
