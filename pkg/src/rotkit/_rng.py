"""Counter-based pseudo-random streams (SplitMix64).

Every draw is a pure function of (seed, counter), so trajectories are
reproducible, random access is O(1), and parallel streams derived through
`derive_seed` are independent.
"""

from __future__ import annotations

import numpy as np

_MASK = 0xFFFFFFFFFFFFFFFF
_GAMMA = 0x9E3779B97F4A7C15
_C1 = 0xBF58476D1CE4E5B9
_C2 = 0x94D049BB133111EB


def mix64(z: int) -> int:
    """Full-avalanche 64-bit finalizer."""
    z = (z + _GAMMA) & _MASK
    z = ((z ^ (z >> 30)) * _C1) & _MASK
    z = ((z ^ (z >> 27)) * _C2) & _MASK
    return z ^ (z >> 31)


def derive_seed(seed: int, label: int) -> int:
    """Independent child seed for stream `label` (ensemble members, axes)."""
    return mix64(mix64(seed & _MASK) ^ mix64((0xA5A5_A5A5_A5A5_A5A5 + label) & _MASK))


def u01(seed: int, counter: int) -> float:
    """Uniform [0,1) draw at position `counter` of stream `seed`."""
    z = (seed + counter * _GAMMA) & _MASK
    z = ((z ^ (z >> 30)) * _C1) & _MASK
    z = ((z ^ (z >> 27)) * _C2) & _MASK
    z = z ^ (z >> 31)
    return z / 2.0**64


def u01_block(seed: int, start: int, count: int) -> np.ndarray:
    """Vectorized uniforms for counters start..start+count-1."""
    with np.errstate(over="ignore"):
        n = np.arange(start, start + count, dtype=np.uint64)
        z = np.uint64(seed & _MASK) + n * np.uint64(_GAMMA)
        z = (z ^ (z >> np.uint64(30))) * np.uint64(_C1)
        z = (z ^ (z >> np.uint64(27))) * np.uint64(_C2)
        z = z ^ (z >> np.uint64(31))
    return z.astype(np.float64) / 2.0**64
