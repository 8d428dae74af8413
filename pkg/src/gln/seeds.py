"""Deterministic derivation of child seeds from one master seed.

Every randomized component (per-class models, per-pixel models, task
permutations, data shuffles) gets its own 64-bit seed derived from the
master seed with the splitmix64 finalizer, so that runs reproduce
bit-exactly while streams stay decorrelated.

Derivation: child_seed(master, *path) starts from mix64(master) and
folds in each path component v as state = mix64(state ^ mix64(v)).
"""

from __future__ import annotations

import numpy as np

_MASK = (1 << 64) - 1
_GOLDEN = 0x9E3779B97F4A7C15

# stream tags, so seeds for different purposes never collide
CLASS_MODELS = 1
PIXEL_MODELS = 2
TASK_PERMUTATIONS = 3
DATA_ORDER = 4
SPLITS = 5
SYNTHETIC_DATA = 6
RUNS = 7


def mix64(x: int) -> int:
    """splitmix64 output function: add the golden gamma, then finalize."""
    x = (x + _GOLDEN) & _MASK
    x ^= x >> 30
    x = (x * 0xBF58476D1CE4E5B9) & _MASK
    x ^= x >> 27
    x = (x * 0x94D049BB133111EB) & _MASK
    x ^= x >> 31
    return x


def child_seed(master: int, *path: int) -> int:
    """64-bit seed for the stream identified by (tag, index, ...) path."""
    state = mix64(master & _MASK)
    for v in path:
        state = mix64(state ^ mix64(v & _MASK))
    return state


def make_rng(seed: int) -> np.random.Generator:
    """The one RNG used everywhere: PCG64 under numpy's Generator.

    Fixed once so experiments reproduce bit-exactly: PCG64 streams are
    platform-independent, and normal variates come from Generator's
    ziggurat standard_normal.
    """
    return np.random.Generator(np.random.PCG64(seed))
