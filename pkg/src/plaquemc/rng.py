"""Counter-based random numbers keyed by (seed, particle, counter).

Every draw is a pure function of its key, so a particle's random stream does
not depend on which worker advances it or in what order.  The mixer is the
SplitMix64 finaliser applied to a three-word key.
"""

from __future__ import annotations

import math

import numba as nb
import numpy as np

_GOLDEN = np.uint64(0x9E3779B97F4A7C15)
_M1 = np.uint64(0xBF58476D1CE4E5B9)
_M2 = np.uint64(0x94D049BB133111EB)
_S30 = np.uint64(30)
_S27 = np.uint64(27)
_S31 = np.uint64(31)
_S11 = np.uint64(11)
_ONE = np.uint64(1)
_INV53 = 1.0 / 9007199254740992.0  # 2**-53

# counters at or above this value are reserved for the release draws
RELEASE_DOMAIN = 1 << 62


@nb.njit(nb.uint64(nb.uint64), cache=True, nogil=True)
def _mix(z):
    z = (z ^ (z >> _S30)) * _M1
    z = (z ^ (z >> _S27)) * _M2
    return z ^ (z >> _S31)


@nb.njit(nb.uint64(nb.uint64, nb.uint64, nb.uint64), cache=True, nogil=True)
def draw_bits(seed, particle, counter):
    key = _mix(seed + _GOLDEN * (particle + _ONE))
    return _mix(key ^ _mix(counter * _GOLDEN + _M2))


@nb.njit(nb.float64(nb.uint64, nb.uint64, nb.uint64), cache=True, nogil=True)
def draw_uniform(seed, particle, counter):
    """Uniform on the open interval (0, 1)."""
    return ((draw_bits(seed, particle, counter) >> _S11) + 0.5) * _INV53


@nb.njit(cache=True, nogil=True)
def draw_normal_pair(seed, particle, counter):
    """Two independent standard normals (Box-Muller) from counters 2c, 2c+1."""
    c = counter * np.uint64(2)
    u1 = draw_uniform(seed, particle, c)
    u2 = draw_uniform(seed, particle, c + _ONE)
    radius = math.sqrt(-2.0 * math.log(u1))
    angle = 2.0 * math.pi * u2
    return radius * math.cos(angle), radius * math.sin(angle)


def _as_key(seed: int) -> np.uint64:
    return np.uint64(int(seed) & 0xFFFFFFFFFFFFFFFF)


@nb.njit(cache=True)
def _uniform_block(seed, particles, counters, out):
    for i in range(particles.size):
        out[i] = draw_uniform(seed, particles[i], counters[i])


def uniforms(seed: int, particles, counters) -> np.ndarray:
    """Vectorised :func:`draw_uniform` over broadcast particle/counter arrays."""
    p, c = np.broadcast_arrays(np.asarray(particles, dtype=np.uint64), np.asarray(counters, dtype=np.uint64))
    out = np.empty(p.shape)
    _uniform_block(_as_key(seed), np.ascontiguousarray(p).ravel(), np.ascontiguousarray(c).ravel(), out.reshape(-1))
    return out
