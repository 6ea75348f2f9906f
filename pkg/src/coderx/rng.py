"""Deterministic 64-bit random streams.

All randomness in the package flows through :class:`Xoshiro256`, a
xoshiro256** generator seeded with splitmix64. The algorithm is fully
specified below so that sequences can be reproduced bit-for-bit in any
language:

* ``splitmix64(x)``: ``x += 0x9E3779B97F4A7C15``;
  ``z = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9``;
  ``z = (z ^ (z >> 27)) * 0x94D049BB133111EB``; return ``z ^ (z >> 31)``
  (all arithmetic mod 2**64).
* Seeding: the four state words are four consecutive splitmix64 outputs
  starting from the 64-bit seed.
* ``random()`` returns ``(next() >> 11) * 2**-53``.
* ``integers(k)`` uses plain rejection sampling: draw ``next()`` and reject
  values ``>= 2**64 - (2**64 % k)``, return ``value % k``.
* ``normal()`` is Box-Muller on ``u1 = 1 - random()`` and ``u2 = random()``;
  both outputs are used, cosine branch first.

Sub-streams are derived with :func:`derive_seed`, which folds a tuple of
non-negative integer keys into the master seed through splitmix64.
"""

from __future__ import annotations

import math
from typing import Iterable

import numpy as np

MASK64 = (1 << 64) - 1


def splitmix64(x: int) -> tuple[int, int]:
    """Advance a splitmix64 state. Returns ``(new_state, output)``."""
    x = (x + 0x9E3779B97F4A7C15) & MASK64
    z = x
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & MASK64
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & MASK64
    return x, z ^ (z >> 31)


def derive_seed(master: int, *keys: int) -> int:
    """Mix integer keys into a master seed, giving an independent stream seed.

    Each key is absorbed as ``state = splitmix64(state ^ key)[1]``; the
    result does not depend on anything but the arguments.
    """
    state = master & MASK64
    _, state = splitmix64(state)
    for key in keys:
        if key < 0:
            raise ValueError("stream keys must be non-negative")
        _, state = splitmix64(state ^ (key & MASK64))
    return state


def _rotl(x: int, k: int) -> int:
    return ((x << k) | (x >> (64 - k))) & MASK64


class Xoshiro256:
    """xoshiro256** pseudo-random generator with a few sampling helpers."""

    def __init__(self, seed: int):
        self.seed = seed & MASK64
        s = self.seed
        words = []
        for _ in range(4):
            s, out = splitmix64(s)
            words.append(out)
        self._s = words
        self._spare: float | None = None

    @classmethod
    def stream(cls, master: int, *keys: int) -> "Xoshiro256":
        return cls(derive_seed(master, *keys))

    def next(self) -> int:
        s0, s1, s2, s3 = self._s
        result = (_rotl((s1 * 5) & MASK64, 7) * 9) & MASK64
        t = (s1 << 17) & MASK64
        s2 ^= s0
        s3 ^= s1
        s1 ^= s2
        s0 ^= s3
        s2 ^= t
        s3 = _rotl(s3, 45)
        self._s = [s0, s1, s2, s3]
        return result

    def random(self) -> float:
        return (self.next() >> 11) * (1.0 / (1 << 53))

    def integers(self, k: int) -> int:
        """Uniform integer in ``[0, k)``."""
        if k <= 0:
            raise ValueError("k must be positive")
        limit = (1 << 64) - ((1 << 64) % k)
        while True:
            v = self.next()
            if v < limit:
                return v % k

    def normal(self) -> float:
        if self._spare is not None:
            z, self._spare = self._spare, None
            return z
        u1 = 1.0 - self.random()
        u2 = self.random()
        r = math.sqrt(-2.0 * math.log(u1))
        self._spare = r * math.sin(2.0 * math.pi * u2)
        return r * math.cos(2.0 * math.pi * u2)

    def normals(self, shape: int | Iterable[int]) -> np.ndarray:
        """Array of standard normal draws filled in C order."""
        shape = (shape,) if isinstance(shape, int) else tuple(shape)
        count = int(np.prod(shape, dtype=np.int64))
        return np.array([self.normal() for _ in range(count)], dtype=float).reshape(shape)

    def bits(self, count: int) -> np.ndarray:
        """``count`` fair bits, one generator output per 64 bits (LSB first)."""
        out = np.empty(count, dtype=np.uint8)
        for start in range(0, count, 64):
            word = self.next()
            for i in range(min(64, count - start)):
                out[start + i] = (word >> i) & 1
        return out

    def shuffle_indices(self, n: int) -> np.ndarray:
        """Fisher-Yates shuffle of ``0..n-1`` (swap position i with a draw in [0, i])."""
        perm = list(range(n))
        for i in range(n - 1, 0, -1):
            j = self.integers(i + 1)
            perm[i], perm[j] = perm[j], perm[i]
        return np.array(perm, dtype=np.int64)
