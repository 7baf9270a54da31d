"""Counter-based deterministic randomness.

Everything random in the toolkit flows through these primitives: a
splitmix64 finalizer over explicit counters, keyed by FNV-1a hashes of
string identifiers. Counter addressing (instead of stateful generators)
keeps per-sample work order-independent and makes every value exactly
reproducible in any language with 64-bit integer arithmetic — the external
scorer protocol depends on that (see README, "Scorer noise").
"""

from __future__ import annotations

import numpy as np

MASK64 = (1 << 64) - 1
GOLDEN = 0x9E3779B97F4A7C15
_MIX1 = 0xBF58476D1CE4E5B9
_MIX2 = 0x94D049BB133111EB
_FNV_OFFSET = 0xCBF29CE484222325
_FNV_PRIME = 0x100000001B3


def mix64(z: int) -> int:
    """splitmix64 finalizer."""
    z &= MASK64
    z = ((z ^ (z >> 30)) * _MIX1) & MASK64
    z = ((z ^ (z >> 27)) * _MIX2) & MASK64
    return z ^ (z >> 31)


def fnv1a64(text: str) -> int:
    """FNV-1a over the UTF-8 bytes of ``text``."""
    h = _FNV_OFFSET
    for byte in text.encode("utf-8"):
        h = ((h ^ byte) * _FNV_PRIME) & MASK64
    return h


def derive_key(*parts: int | str) -> int:
    """Fold identifiers and integers into one 64-bit key (order-sensitive)."""
    h = _FNV_OFFSET
    for part in parts:
        if isinstance(part, str):
            h = mix64(h ^ fnv1a64(part))
        else:
            h = mix64((h + (part & MASK64) * GOLDEN) & MASK64)
    return h


def _mix64_vec(z: np.ndarray) -> np.ndarray:
    z = z.astype(np.uint64, copy=True)
    z ^= z >> np.uint64(30)
    z *= np.uint64(_MIX1)
    z ^= z >> np.uint64(27)
    z *= np.uint64(_MIX2)
    z ^= z >> np.uint64(31)
    return z

def hashed_unit(key: int, counters: np.ndarray) -> np.ndarray:
    """Uniform values in [0, 1) addressed by ``counters`` under ``key``.

    Value i is ``mix64(key + (counters[i]+1) * GOLDEN) >> 11`` scaled by
    2**-53, so it depends only on (key, counter), never on evaluation order.
    """
    counters = np.asarray(counters, dtype=np.uint64)
    states = np.uint64(key) + (counters + np.uint64(1)) * np.uint64(GOLDEN)
    bits = _mix64_vec(states) >> np.uint64(11)
    return bits.astype(np.float64) * (2.0 ** -53)


class CounterStream:
    """Sequential convenience wrapper over :func:`hashed_unit`.

    Draws consume consecutive counters; two streams with the same key yield
    identical sequences regardless of chunking.
    """

    def __init__(self, key: int):
        self._key = key & MASK64
        self._counter = 0

    def uniform(self, n: int | None = None, lo: float = 0.0, hi: float = 1.0):
        count = 1 if n is None else int(n)
        counters = np.arange(self._counter, self._counter + count, dtype=np.uint64)
        self._counter += count
        values = lo + (hi - lo) * hashed_unit(self._key, counters)
        return float(values[0]) if n is None else values

    def integer(self, lo: int, hi: int) -> int:
        """Uniform integer in [lo, hi] inclusive."""
        return lo + int(self.uniform() * (hi - lo + 1))

    def unit_grid(self, shape: tuple[int, ...]) -> np.ndarray:
        """Uniform [0, 1) array of ``shape`` drawn as one counter block."""
        n = int(np.prod(shape))
        return self.uniform(n).reshape(shape)
