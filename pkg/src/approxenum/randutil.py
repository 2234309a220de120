"""Deterministic seed derivation for independent random streams.

Every randomized component takes an integer seed and derives child streams by
label, so the same session seed always replays the same run regardless of the
order in which components consume randomness.
"""

from __future__ import annotations

import zlib

import numpy as np


def child_seed(seed: int, *labels) -> int:
    material = repr((int(seed),) + labels).encode()
    return zlib.crc32(material) ^ (int(seed) & 0xFFFFFFFF) ^ (zlib.adler32(material) << 16)


def child_rng(seed: int, *labels) -> np.random.Generator:
    return np.random.default_rng(np.random.SeedSequence(child_seed(seed, *labels)))
