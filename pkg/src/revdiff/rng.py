"""Counter-based Philox4x64-10 generator compiled with numba.

Every draw is a pure function of (counter, key), so a walker's noise depends
only on its id, the step and the seed, never on scheduling.
"""

from __future__ import annotations

import math

import numba as nb
import numpy as np

__all__ = ["philox4x64", "uniform53", "normal", "normal4", "uniforms", "KEY_CONST", "STREAM_INIT", "STREAM_FORWARD", "STREAM_BACKWARD"]

_M0 = np.uint64(0xD2E7470EE14C6C93)
_M1 = np.uint64(0xCA5A826395121157)
_W0 = np.uint64(0x9E3779B97F4A7C15)
_W1 = np.uint64(0xBB67AE8584CAA73B)
_LO32 = np.uint64(0xFFFFFFFF)
_S32 = np.uint64(32)
_S11 = np.uint64(11)

KEY_CONST = 0x5245564449464621  # second key word, fixed
STREAM_INIT = 1
STREAM_FORWARD = 2
STREAM_BACKWARD = 3


@nb.njit(inline="always", cache=True)
def _mulhilo(a, b):
    a_lo = a & _LO32
    a_hi = a >> _S32
    b_lo = b & _LO32
    b_hi = b >> _S32
    ll = a_lo * b_lo
    lh = a_lo * b_hi
    hl = a_hi * b_lo
    hh = a_hi * b_hi
    mid = (ll >> _S32) + (lh & _LO32) + (hl & _LO32)
    hi = hh + (lh >> _S32) + (hl >> _S32) + (mid >> _S32)
    return hi, a * b


@nb.njit(nogil=True, cache=True)
def philox4x64(c0, c1, c2, c3, k0, k1):
    """Ten rounds of Philox4x64 on counter (c0..c3) with key (k0, k1)."""
    c0 = np.uint64(c0)
    c1 = np.uint64(c1)
    c2 = np.uint64(c2)
    c3 = np.uint64(c3)
    k0 = np.uint64(k0)
    k1 = np.uint64(k1)
    for r in range(10):
        if r > 0:
            k0 = k0 + _W0
            k1 = k1 + _W1
        hi0, lo0 = _mulhilo(_M0, c0)
        hi1, lo1 = _mulhilo(_M1, c2)
        c0, c1, c2, c3 = hi1 ^ c1 ^ k0, lo1, hi0 ^ c3 ^ k1, lo0
    return c0, c1, c2, c3


@nb.njit(inline="always", cache=True)
def uniform53(r):
    """Uniform on (0, 1] from the top 53 bits."""
    return ((r >> _S11) + np.uint64(1)) * (1.0 / 9007199254740992.0)


@nb.njit(nogil=True, cache=True)
def normal(step, walker, stream, seed):
    """One standard normal (Box-Muller, cosine branch) for a (step, walker) cell."""
    r0, r1, _, _ = philox4x64(step, walker, stream, 0, seed, KEY_CONST)
    u1 = uniform53(r0)
    u2 = uniform53(r1)
    return math.sqrt(-2.0 * math.log(u1)) * math.cos(2.0 * math.pi * u2)


@nb.njit(nogil=True, cache=True)
def normal4(block, walker, stream, seed):
    """Four standard normals (both Box-Muller branches on two uniform pairs)
    for steps 4*block .. 4*block + 3 of a walker."""
    r0, r1, r2, r3 = philox4x64(block, walker, stream, 0, seed, KEY_CONST)
    a = math.sqrt(-2.0 * math.log(uniform53(r0)))
    ta = 2.0 * math.pi * uniform53(r1)
    b = math.sqrt(-2.0 * math.log(uniform53(r2)))
    tb = 2.0 * math.pi * uniform53(r3)
    return a * math.cos(ta), a * math.sin(ta), b * math.cos(tb), b * math.sin(tb)


@nb.njit(nogil=True, cache=True)
def _uniforms(n, step, stream, seed, out):
    for i in range(n):
        r0, _, _, _ = philox4x64(step, i, stream, 0, seed, KEY_CONST)
        out[i] = uniform53(r0)


def uniforms(n: int, seed: int, stream: int = STREAM_INIT, step: int = 0) -> np.ndarray:
    """Uniforms on (0, 1], entry i drawn from walker i's stream."""
    out = np.empty(n)
    _uniforms(n, np.uint64(step), np.uint64(stream), np.uint64(seed & 0xFFFFFFFFFFFFFFFF), out)
    return out
