"""Counter-based 64-bit pseudo-random numbers.

Every draw is a pure function of ``(seed, stream, counter)``::

    key  = mix64(seed + (stream + 1) * GAMMA)
    draw = mix64(key  + (counter + 1) * GAMMA)        (all mod 2**64)

where ``mix64`` is the SplitMix64 finalizer and ``GAMMA`` the golden-ratio
increment 0x9E3779B97F4A7C15.  Streams index independent objects (one sampled
function, one sample path) and counters index positions inside them (a node's
length-lex rank, a digit position).  Random access means a lazily explored
tree sees the same label at a node no matter in which order nodes are visited,
and a sample's outcome does not depend on which worker produced it.

Uniform doubles take the top 53 bits: ``(draw >> 11) * 2**-53``.
"""

from __future__ import annotations

import numpy as np

MASK64 = (1 << 64) - 1
GAMMA = 0x9E3779B97F4A7C15
_M1 = 0xBF58476D1CE4E5B9
_M2 = 0x94D049BB133111EB


def mix64(z: int) -> int:
    z &= MASK64
    z = ((z ^ (z >> 30)) * _M1) & MASK64
    z = ((z ^ (z >> 27)) * _M2) & MASK64
    return z ^ (z >> 31)


def draw(seed: int, stream: int, counter: int) -> int:
    key = mix64(seed + (stream + 1) * GAMMA)
    return mix64(key + (counter + 1) * GAMMA)


def uniform(seed: int, stream: int, counter: int) -> float:
    return (draw(seed, stream, counter) >> 11) * 2.0**-53


_U = np.uint64


def _mix64_array(z: np.ndarray) -> np.ndarray:
    z = z ^ (z >> _U(30))
    z = z * _U(_M1)
    z = z ^ (z >> _U(27))
    z = z * _U(_M2)
    return z ^ (z >> _U(31))


def stream_keys(seed: int, streams) -> np.ndarray:
    """Per-stream keys, vectorized over ``streams``."""
    streams = np.asarray(streams, dtype=np.uint64)
    with np.errstate(over="ignore"):
        return _mix64_array(_U(seed & MASK64) + (streams + _U(1)) * _U(GAMMA))


def draws(keys: np.ndarray, counters) -> np.ndarray:
    """Raw 64-bit draws for paired (stream key, counter) arrays."""
    counters = np.asarray(counters, dtype=np.uint64)
    with np.errstate(over="ignore"):
        return _mix64_array(keys + (counters + _U(1)) * _U(GAMMA))


def uniforms(keys: np.ndarray, counters) -> np.ndarray:
    return (draws(keys, counters) >> _U(11)).astype(np.float64) * 2.0**-53
