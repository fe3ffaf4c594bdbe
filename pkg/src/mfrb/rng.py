"""Keyed random streams.

Every random consumer derives its own PCG64 stream from the master seed and
an integer key path, so results do not depend on call order or on how work
is split across threads.
"""

from __future__ import annotations

import numpy as np

# top-level key namespaces
SAMPLING_WORK = 1
SAMPLING_FINAL = 2
MC_EVAL = 3
GREEDY = 4
RUMOR = 5
RANDOM_BASELINE = 6
MISC = 7


def stream(seed: int, *key: int) -> np.random.Generator:
    """Independent generator for ``(seed, *key)``."""
    return np.random.Generator(np.random.PCG64(np.random.SeedSequence(seed, spawn_key=key)))


def child_seed(rng: np.random.Generator) -> int:
    """Draw a 63-bit seed from ``rng`` for APIs keyed by integer seed."""
    return int(rng.integers(0, 2**63 - 1))
