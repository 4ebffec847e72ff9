"""Reproducible randomness on named Philox counter streams.

Every draw in this package is addressed, not consumed: a stream is
identified by ``(seed, tag, index)`` and values within it by counter
position, so results do not depend on the order in which callers ask for
them.  Gaussians come from the inverse normal CDF applied to the 53-bit
uniform carved out of each raw 64-bit Philox word.
"""

from __future__ import annotations

import numpy as np
from scipy.special import ndtri

_GOLDEN = 0x9E3779B97F4A7C15
_MASK = (1 << 64) - 1


def _mix(x: int) -> int:
    """splitmix64 finalizer; spreads structured inputs over 64 bits."""
    x = (x + _GOLDEN) & _MASK
    x ^= x >> 30
    x = (x * 0xBF58476D1CE4E5B9) & _MASK
    x ^= x >> 27
    x = (x * 0x94D049BB133111EB) & _MASK
    x ^= x >> 31
    return x


def _tag_hash(tag: str) -> int:
    h = 0xCBF29CE484222325  # FNV-1a, independent of PYTHONHASHSEED
    for byte in tag.encode():
        h = ((h ^ byte) * 0x100000001B3) & _MASK
    return h


def stream_key(seed: int, tag: str, index: int = 0) -> list[int]:
    """Philox key of the substream ``(seed, tag, index)``."""
    return [_mix((seed & _MASK) ^ _tag_hash(tag)), _mix(index & _MASK)]


def raw_words(seed: int, tag: str, count: int, index: int = 0) -> np.ndarray:
    bitgen = np.random.Philox(key=stream_key(seed, tag, index))
    return bitgen.random_raw(count)


def uniforms(seed: int, tag: str, count: int, index: int = 0) -> np.ndarray:
    """Doubles strictly inside (0, 1) from the top 53 bits of each word."""
    words = raw_words(seed, tag, count, index)
    return ((words >> np.uint64(11)).astype(np.float64) + 0.5) * 2.0**-53


def normals(seed: int, tag: str, count: int, index: int = 0) -> np.ndarray:
    """Standard normals via the inverse CDF on the counter stream."""
    return ndtri(uniforms(seed, tag, count, index))


def normal_at(seed: int, tag: str, index: int) -> float:
    """Single standard normal from the substream dedicated to ``index``."""
    return float(normals(seed, tag, 1, index=index)[0])


def integers_below(seed: int, tag: str, count: int, high: int, index: int = 0) -> np.ndarray:
    """Integers in [0, high) by scaling 53-bit uniforms (bias < high / 2^53)."""
    u = uniforms(seed, tag, count, index)
    return np.minimum((u * high).astype(np.int64), high - 1)


def generator(seed: int, tag: str, index: int = 0) -> np.random.Generator:
    """A numpy Generator on the named substream, for library distributions."""
    return np.random.Generator(np.random.Philox(key=stream_key(seed, tag, index)))
