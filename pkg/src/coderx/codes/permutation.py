"""Seeded codeword permutations used as per-user signatures."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..rng import Xoshiro256


@dataclass(frozen=True, eq=False)
class Permutation:
    """Bijection on ``0..n-1``.

    ``apply`` maps ``x`` to ``x_p`` with ``x_p[k] = x[mapping[k]]``, i.e.
    multiplication by the permutation matrix with ones at
    ``(k, mapping[k])``.
    """

    mapping: np.ndarray
    seed: int | None = None

    def __post_init__(self):
        mp = np.asarray(self.mapping, dtype=np.int64)
        if mp.ndim != 1 or not np.array_equal(np.sort(mp), np.arange(mp.size)):
            raise ValueError("mapping is not a bijection on 0..n-1")
        mp.setflags(write=False)
        object.__setattr__(self, "mapping", mp)

    @property
    def length(self) -> int:
        return self.mapping.size

    def apply(self, x) -> np.ndarray:
        x = np.asarray(x)
        if x.shape[0] != self.length:
            raise ValueError(f"length mismatch: {x.shape[0]} vs {self.length}")
        return x[self.mapping]

    def invert(self, x) -> np.ndarray:
        x = np.asarray(x)
        if x.shape[0] != self.length:
            raise ValueError(f"length mismatch: {x.shape[0]} vs {self.length}")
        out = np.empty_like(x)
        out[self.mapping] = x
        return out

    def inverse(self) -> "Permutation":
        inv = np.empty_like(self.mapping)
        inv[self.mapping] = np.arange(self.length)
        return Permutation(inv)

    def __eq__(self, other):
        return isinstance(other, Permutation) and np.array_equal(self.mapping, other.mapping)

    def __hash__(self):
        return hash(self.mapping.tobytes())

    @classmethod
    def identity(cls, n: int) -> "Permutation":
        return cls(np.arange(n))


def build_permutation(seed: int, length: int) -> Permutation:
    """Fisher-Yates shuffle of ``0..length-1`` driven by ``Xoshiro256(seed)``."""
    if length < 1:
        raise ValueError("length must be >= 1")
    return Permutation(Xoshiro256(seed).shuffle_indices(length), seed=seed)
