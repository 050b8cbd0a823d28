"""Seeded random generators.

Every stream is a PCG64 generator keyed through ``numpy.random.SeedSequence``
on ``(seed, *stream)``, so a tree's randomness depends only on the seed and
its index, never on thread scheduling.
"""

import numpy as np

_MASK64 = (1 << 64) - 1


def make_generator(seed: int, *stream: int) -> np.random.Generator:
    """PCG64 generator for ``seed`` and an optional stream path (e.g. tree index)."""
    entropy = [seed & _MASK64, *(int(s) & _MASK64 for s in stream)]
    return np.random.Generator(np.random.PCG64(np.random.SeedSequence(entropy)))
