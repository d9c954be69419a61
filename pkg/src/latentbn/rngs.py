"""Deterministic, splittable RNG streams.

Every stochastic stage draws from a generator keyed by (seed, *path), so
replicates and stages are independent and results do not depend on
execution order or worker scheduling.
"""

from __future__ import annotations

import numpy as np

STAGE_DAG = 1
STAGE_LATENT = 2
STAGE_MIX = 3
STAGE_BOOT = 4


def _entropy(seed: int, path: tuple[int, ...]) -> list[int]:
    if int(seed) < 0 or any(int(x) < 0 for x in path):
        raise ValueError("seed and path components must be nonnegative")
    return [int(seed), *[int(x) for x in path]]


def rng_for(seed: int, *path: int) -> np.random.Generator:
    return np.random.default_rng(np.random.SeedSequence(_entropy(seed, path)))


def spawn_seed(seed: int, *path: int) -> int:
    """A derived scalar seed, for APIs that take a single integer."""
    ss = np.random.SeedSequence(_entropy(seed, path))
    return int(ss.generate_state(1, dtype=np.uint64)[0])
