"""
Seeded generators for reproducible Monte Carlo.

Every replicate gets its own Philox stream keyed by (seed, *keys), so a
replicate's draws never depend on how many workers ran before it.
"""

from typing import Optional

import numpy as np

__all__ = ["make_rng", "replicate_rng"]


def make_rng(seed: Optional[int], *keys: int) -> np.random.Generator:
    """
    Build a counter-based generator for the stream identified by keys.

    Args:
        seed: Master seed. None draws fresh OS entropy.
        keys: Stream path, e.g. (stage, replicate_index).

    Returns:
        np.random.Generator: Philox-backed generator.
    """
    seq = np.random.SeedSequence(seed, spawn_key=tuple(int(k) for k in keys))
    return np.random.Generator(np.random.Philox(seq))


def replicate_rng(seed: Optional[int], stage: int, index: int) -> np.random.Generator:
    """Generator for replicate `index` of run stage `stage`."""
    return make_rng(seed, stage, index)
