"""Counter-based random streams.

Every random decision in the package is a pure function of (seed, counter)
through the splitmix64 output mix, so samplers have no sequential state:
any subset of a stream can be evaluated in any order, on any thread count,
with bit-identical results. Scalar and vectorized forms agree exactly.
"""

from __future__ import annotations

import numpy as np

MASK64 = (1 << 64) - 1

_GOLDEN = 0x9E3779B97F4A7C15
_MIX1 = 0xBF58476D1CE4E5B9
_MIX2 = 0x94D049BB133111EB

# stream tags: distinct constants so consumers never share counters
TAG_VERTEX = 0x01
TAG_LEVELS = 0x02
TAG_MC = 0x03
TAG_INJECTIVE = 0x04
TAG_TRIAL = 0x05
TAG_INIT = 0x06
TAG_CYLINDER = 0x07
TAG_PARTITION = 0x08
TAG_MAPS = 0x09
TAG_RESTART = 0x0A


def mix64(key: int, ctr: int) -> int:
    """splitmix64 word at position ctr of the stream keyed by key."""
    z = (key + (ctr + 1) * _GOLDEN) & MASK64
    z = ((z ^ (z >> 30)) * _MIX1) & MASK64
    z = ((z ^ (z >> 27)) * _MIX2) & MASK64
    return z ^ (z >> 31)


def derive(seed: int, *tags: int) -> int:
    """Child key from a root seed and a path of stream tags."""
    s = seed & MASK64
    for t in tags:
        s = mix64(s, t & MASK64)
    return s


def u01(h: int) -> float:
    """Map a 64-bit word to [0, 1) using its top 53 bits."""
    return (h >> 11) * 2.0**-53


def level_of(h: int, l: int) -> int:
    """Exact floor(l * h / 2**64); the half-open level index in 0..l-1."""
    return (h * l) >> 64


def np_mix64(key: int, ctrs: np.ndarray) -> np.ndarray:
    """Vectorized mix64; ctrs is any integer array, result uint64."""
    c = ctrs.astype(np.uint64, copy=False)
    z = np.uint64(key & MASK64) + (c + np.uint64(1)) * np.uint64(_GOLDEN)
    z = (z ^ (z >> np.uint64(30))) * np.uint64(_MIX1)
    z = (z ^ (z >> np.uint64(27))) * np.uint64(_MIX2)
    return z ^ (z >> np.uint64(31))


def np_level_of(h: np.ndarray, l: int) -> np.ndarray:
    """Vectorized level_of; exact via 32-bit split (no float rounding)."""
    lo32 = np.uint64(0xFFFFFFFF)
    hi = h >> np.uint64(32)
    lo = h & lo32
    ul = np.uint64(l)
    lev = (hi * ul + ((lo * ul) >> np.uint64(32))) >> np.uint64(32)
    return lev.astype(np.int64)


def np_u01(h: np.ndarray) -> np.ndarray:
    return (h >> np.uint64(11)).astype(np.float64) * 2.0**-53
