"""Seed handling.

Every stochastic routine takes a ``seed`` that may be an int, a
``numpy.random.SeedSequence`` or an existing ``Generator``. All streams use
PCG64, which is stable across platforms and numpy versions.
"""

from typing import Union

import numpy as np

Seed = Union[int, np.random.SeedSequence, np.random.Generator]


def as_seed_sequence(seed: Seed) -> np.random.SeedSequence:
    if isinstance(seed, np.random.SeedSequence):
        return seed
    if isinstance(seed, np.random.Generator):
        return np.random.SeedSequence(int(seed.integers(0, 2**63)))
    if isinstance(seed, (bool, float)) or int(seed) != seed or seed < 0:
        raise ValueError(f"seed must be a non-negative integer, got {seed!r}")
    return np.random.SeedSequence(int(seed))


def generator(seed: Seed) -> np.random.Generator:
    if isinstance(seed, np.random.Generator):
        return seed
    return np.random.Generator(np.random.PCG64(as_seed_sequence(seed)))


def spawn(seed: Seed, n: int) -> list:
    """Split ``seed`` into ``n`` independent child sequences.

    Spawning works on a copy, so passing the same SeedSequence twice yields
    the same children.
    """
    ss = as_seed_sequence(seed)
    fresh = np.random.SeedSequence(ss.entropy, spawn_key=ss.spawn_key, pool_size=ss.pool_size)
    return fresh.spawn(n)


def derive_seed(base_seed: int, index: int) -> int:
    """Deterministic 63-bit seed for replication ``index`` of ``base_seed``."""
    state = np.random.SeedSequence([int(base_seed), int(index)]).generate_state(2, np.uint32)
    return int((int(state[0]) << 31) ^ int(state[1]))
