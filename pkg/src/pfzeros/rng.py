"""Counter-based random streams: every draw is a pure function of (seed, index, slot).

Any partition of the index range over workers reproduces the same numbers,
so parallel samplers stay bit-identical after index-ordered assembly.
"""
from __future__ import annotations

import numpy as np

_GAMMA = np.uint64(0x9E3779B97F4A7C15)
_M1 = np.uint64(0xBF58476D1CE4E5B9)
_M2 = np.uint64(0x94D049BB133111EB)
_SLOT = np.uint64(0xD1B54A32D192ED03)


def _mix(z: np.ndarray) -> np.ndarray:
    z = (z ^ (z >> np.uint64(30))) * _M1
    z = (z ^ (z >> np.uint64(27))) * _M2
    return z ^ (z >> np.uint64(31))


def hash64(seed: int, index, slot: int = 0) -> np.ndarray:
    idx = np.atleast_1d(np.asarray(index, dtype=np.uint64))
    with np.errstate(over="ignore"):
        key = _mix(np.array([seed & 0xFFFFFFFFFFFFFFFF], dtype=np.uint64) * _GAMMA + _GAMMA)
        h = _mix(key ^ (idx * _GAMMA + np.uint64(1)))
        return _mix(h + np.uint64(slot & 0xFFFFFFFFFFFFFFFF) * _SLOT)


def uniform(seed: int, index, slot: int = 0) -> np.ndarray:
    """Uniform doubles in the open interval (0, 1)."""
    h = hash64(seed, index, slot)
    return ((h >> np.uint64(11)).astype(np.float64) + 0.5) * 2.0 ** -53
