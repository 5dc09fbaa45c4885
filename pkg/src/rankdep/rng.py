"""Project-wide deterministic random number generation.

Every stochastic routine takes either an integer seed or a
``numpy.random.Generator`` built here. The bit generator is PCG64 (O'Neill's
permuted congruential generator, 128-bit state) seeded through
``numpy.random.SeedSequence``; its output stream is specified by numpy and
identical on every platform.
"""
from __future__ import annotations

from typing import Union

import numpy as np

Rng = np.random.Generator
SeedLike = Union[int, np.random.Generator, None]


def make_rng(seed: SeedLike = 0) -> Rng:
    if isinstance(seed, np.random.Generator):
        return seed
    if seed is None:
        seed = 0
    return np.random.Generator(np.random.PCG64(np.random.SeedSequence(int(seed) & (2**64 - 1))))


def split_rngs(seed: int, count: int) -> list[Rng]:
    """Independent child generators for parallel simulation."""
    children = np.random.SeedSequence(int(seed) & (2**64 - 1)).spawn(count)
    return [np.random.Generator(np.random.PCG64(c)) for c in children]
