"""
Counter-based seed streams.

A stream is addressed by (seed, stream id, *counters); adding a new stream id
never changes the numbers drawn by existing ones.
"""

from enum import IntEnum

import numpy as np


class Stream(IntEnum):
    COVARIATES = 1
    DISCREPANCY = 2
    NOISE = 3
    MASK = 4
    CHAINS = 5
    INIT = 6
    PNM = 7


def derive_seed(seed: int, stream: int, *counters: int) -> int:
    """Integer seed for substream (seed, stream, *counters)."""
    sequence = np.random.SeedSequence([int(seed), int(stream), *map(int, counters)])
    return int(sequence.generate_state(1, dtype=np.uint64)[0])


def generator(seed: int, stream: int, *counters: int) -> np.random.Generator:
    return np.random.default_rng(derive_seed(seed, stream, *counters))
