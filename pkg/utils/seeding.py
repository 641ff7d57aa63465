"""
Seeding
Deterministic per-frame seeds, independent of worker count and scheduling
"""

import numpy as np

_MASK = (1 << 64) - 1


def splitmix64(value: int) -> int:
    """One splitmix64 output step applied to a 64-bit state"""
    z = (value + 0x9E3779B97F4A7C15) & _MASK
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & _MASK
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & _MASK
    return z ^ (z >> 31)


def derive_frame_seed(master_seed: int, frame_index: int, point_index: int) -> int:
    """
    64-bit seed of one frame of one sweep point

    The master seed, point index and frame index are folded in through chained
    splitmix64 steps, so nearby indices map to unrelated seeds.
    """
    state = splitmix64(master_seed & _MASK)
    state = splitmix64(state ^ (point_index & _MASK))
    return splitmix64(state ^ (frame_index & _MASK))


def frame_rng(master_seed: int, frame_index: int, point_index: int) -> np.random.Generator:
    return np.random.default_rng(derive_frame_seed(master_seed, frame_index, point_index))
