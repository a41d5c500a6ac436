"""Named random substreams derived from a single integer seed.

Every consumer of randomness (dataset generation, CV fold shuffling, k-means
restarts, ensemble resampling) asks for its own stream by name plus optional
integer/string keys, so adding draws in one component never shifts another.
"""

from __future__ import annotations

import zlib

import numpy as np


def _key(k) -> int:
    if isinstance(k, (int, np.integer)):
        if k < 0:
            raise ValueError(f"substream keys must be non-negative, got {k}")
        return int(k)
    return zlib.crc32(str(k).encode("utf-8"))


def seed_sequence(seed: int, name: str, *keys) -> np.random.SeedSequence:
    return np.random.SeedSequence([_key(seed), _key(name), *(_key(k) for k in keys)])


def substream(seed: int, name: str, *keys) -> np.random.Generator:
    """Generator for the stream ``name`` (and keys) under ``seed``."""
    return np.random.default_rng(seed_sequence(seed, name, *keys))


def derive_seed(seed: int, name: str, *keys) -> int:
    """A 31-bit integer seed for handing to functions that take plain ints."""
    return int(seed_sequence(seed, name, *keys).generate_state(1)[0] >> 1)
