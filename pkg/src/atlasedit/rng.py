"""Seeded random-number substreams.

Every run derives all of its randomness from a single integer seed.  Each
consumer asks for a named substream; the name is hashed into the seed
material so that adding a new consumer never perturbs existing streams.
"""

from __future__ import annotations

import hashlib

import numpy as np


def _name_words(name: str) -> tuple[int, ...]:
    digest = hashlib.sha256(name.encode("utf-8")).digest()
    return tuple(int.from_bytes(digest[i : i + 4], "little") for i in range(0, 16, 4))


def substream(seed: int, name: str) -> np.random.Generator:
    """Return a Generator for ``name`` that is independent of other names."""
    return np.random.Generator(np.random.PCG64(np.random.SeedSequence((seed, *_name_words(name)))))


def substream_seed(seed: int, name: str) -> int:
    """A derived 63-bit integer seed for consumers that want a plain int (e.g. torch)."""
    ss = np.random.SeedSequence((seed, *_name_words(name)))
    return int(ss.generate_state(1, dtype=np.uint64)[0] >> 1)
