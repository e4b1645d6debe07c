"""Seedable, splittable counter-based random streams.

All stochastic routines take an explicit ``numpy.random.Generator``. Streams
are built on Philox (a counter-based bit generator) keyed by a root seed and
an integer path, so ``make_rng(seed, r)`` for replicate ``r`` is independent
of every other replicate and reproducible in isolation.
"""

import numpy as np


def make_rng(seed: int = 0, *path: int) -> np.random.Generator:
    ss = np.random.SeedSequence(int(seed), spawn_key=tuple(int(p) for p in path))
    return np.random.Generator(np.random.Philox(ss))


def as_rng(rng) -> np.random.Generator:
    """Accept a Generator or an integer seed."""
    if isinstance(rng, np.random.Generator):
        return rng
    return make_rng(0 if rng is None else rng)
