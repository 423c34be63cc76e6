"""Labeled, counter-based random streams derived from one run seed.

Every random draw in the package goes through :func:`stream`, so any phase
(component sampling, subspace init, a single rounding trial) can be replayed
in isolation from ``(seed, label, *counters)``.
"""

from __future__ import annotations

import zlib

import numpy as np


def _label_key(label: str) -> int:
    return zlib.crc32(label.encode("utf-8"))


def stream(seed: int, label: str, *counters: int) -> np.random.Generator:
    """Independent Philox generator for ``(seed, label, counters...)``."""
    if seed < 0:
        raise ValueError("seed must be non-negative")
    key = (_label_key(label),) + tuple(int(c) for c in counters)
    ss = np.random.SeedSequence(entropy=int(seed), spawn_key=key)
    return np.random.Generator(np.random.Philox(ss))


def child_seed(seed: int, label: str, *counters: int) -> int:
    """A 63-bit integer seed for handing to a sub-phase that wants its own seed."""
    key = (_label_key(label),) + tuple(int(c) for c in counters)
    words = np.random.SeedSequence(entropy=int(seed), spawn_key=key).generate_state(2, np.uint32)
    return (int(words[0]) << 31) ^ int(words[1])
