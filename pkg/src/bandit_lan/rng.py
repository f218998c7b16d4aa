"""Deterministic seed derivation and random stream construction.

Every random quantity in the package is drawn from a ``numpy`` PCG64
generator whose seed is derived from a user-supplied 64-bit base seed and
a path of small integers (cell index, replication index, stream tag).
The derivation is pure 64-bit integer arithmetic, documented in the README,
so results never depend on worker scheduling and can be reproduced from
the recipe alone.
"""

from __future__ import annotations

import numpy as np

MASK64 = (1 << 64) - 1

_GOLDEN = 0x9E3779B97F4A7C15
_MIX1 = 0xBF58476D1CE4E5B9
_MIX2 = 0x94D049BB133111EB


def splitmix64(x: int) -> int:
    """One output step of the splitmix64 generator for state ``x``."""
    x = (x + _GOLDEN) & MASK64
    z = x
    z = ((z ^ (z >> 30)) * _MIX1) & MASK64
    z = ((z ^ (z >> 27)) * _MIX2) & MASK64
    return z ^ (z >> 31)


def derive_seed(base: int, *path: int) -> int:
    """Mix ``base`` with an integer path into a new 64-bit seed.

    Folds left to right: ``state <- splitmix64(state XOR splitmix64(part))``
    starting from ``state = base``. Deterministic, order-sensitive, and
    collision-resistant enough for seeding disjoint replication cells.
    """
    state = base & MASK64
    for part in path:
        state = splitmix64(state ^ splitmix64(part & MASK64))
    return state


def stream(seed: int) -> np.random.Generator:
    """A fresh PCG64 generator seeded with the given 64-bit integer."""
    return np.random.Generator(np.random.PCG64(seed & MASK64))
