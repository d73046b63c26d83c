"""Counter-based normal variates keyed by (master seed, trajectory index).

Each trajectory owns a SplitMix64 stream whose starting point is a hash of the
master seed and its index, so a trajectory's random numbers never depend on
which worker runs it or in what order.  Normal pairs come from Box-Muller on
two 53-bit uniforms.  The scalar functions are compiled by numba when it is
available; the ``*_array`` twins are the vectorized numpy equivalents and
produce the same bits.
"""
from __future__ import annotations

import math

import numpy as np

from ._jit import njit

GOLDEN = np.uint64(0x9E3779B97F4A7C15)
MIX1 = np.uint64(0xBF58476D1CE4E5B9)
MIX2 = np.uint64(0x94D049BB133111EB)
_S30 = np.uint64(30)
_S27 = np.uint64(27)
_S31 = np.uint64(31)
_S11 = np.uint64(11)
_ONE = np.uint64(1)
_TWO = np.uint64(2)
TWO_PI = 2.0 * math.pi
INV_2_53 = 1.0 / 9007199254740992.0


@njit(inline="always")
def mix64(z):
    z = (z ^ (z >> _S30)) * MIX1
    z = (z ^ (z >> _S27)) * MIX2
    return z ^ (z >> _S31)


@njit(inline="always")
def trajectory_key(seed, index):
    # explicit casts: uint64 mixed with int64 silently promotes to float64 in numba
    seed = np.uint64(seed)
    index = np.uint64(index)
    return mix64(mix64(seed + GOLDEN) ^ mix64((index + _ONE) * GOLDEN))


@njit(inline="always")
def normal_pair(key, pair):
    """The ``pair``-th pair of independent standard normals of stream ``key``."""
    key = np.uint64(key)
    c = np.uint64(pair) * _TWO
    h1 = mix64(key + (c + _ONE) * GOLDEN)
    h2 = mix64(key + (c + _TWO) * GOLDEN)
    u1 = (float(h1 >> _S11) + 1.0) * INV_2_53
    u2 = float(h2 >> _S11) * INV_2_53
    rad = math.sqrt(-2.0 * math.log(u1))
    ang = TWO_PI * u2
    return rad * math.cos(ang), rad * math.sin(ang)


def mix64_array(z: np.ndarray) -> np.ndarray:
    z = (z ^ (z >> _S30)) * MIX1
    z = (z ^ (z >> _S27)) * MIX2
    return z ^ (z >> _S31)


def trajectory_keys(seed: int, indices: np.ndarray) -> np.ndarray:
    idx = np.asarray(indices, dtype=np.uint64)
    with np.errstate(over="ignore"):
        s = mix64_array(np.array([seed], dtype=np.uint64) + GOLDEN)
        return mix64_array(s ^ mix64_array((idx + _ONE) * GOLDEN))


def normal_pair_array(keys: np.ndarray, pair: int) -> tuple[np.ndarray, np.ndarray]:
    c = np.uint64(2 * pair)
    with np.errstate(over="ignore"):
        h1 = mix64_array(keys + (c + _ONE) * GOLDEN)
        h2 = mix64_array(keys + (c + _TWO) * GOLDEN)
    u1 = ((h1 >> _S11).astype(np.float64) + 1.0) * INV_2_53
    u2 = (h2 >> _S11).astype(np.float64) * INV_2_53
    rad = np.sqrt(-2.0 * np.log(u1))
    ang = TWO_PI * u2
    return rad * np.cos(ang), rad * np.sin(ang)
