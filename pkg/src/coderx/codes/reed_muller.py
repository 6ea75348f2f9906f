"""Kronecker-power generators, bit reversal and Reed-Muller codes."""

from __future__ import annotations

from dataclasses import dataclass
from math import comb

import numpy as np

from . import gf2
from .parity import ParityCheckMatrix

KERNEL = np.array([[1, 0], [1, 1]], dtype=np.uint8)


def kronecker_power(n: int) -> np.ndarray:
    """n-fold Kronecker power of the 2x2 polarizing kernel (2**n x 2**n)."""
    G = np.ones((1, 1), dtype=np.uint8)
    for _ in range(n):
        G = np.kron(G, KERNEL).astype(np.uint8)
    return G


def bit_reversal_permutation(n: int) -> np.ndarray:
    """Index map ``i -> reverse of the n-bit binary representation of i``."""
    idx = np.arange(1 << n)
    rev = np.zeros_like(idx)
    for b in range(n):
        rev |= ((idx >> b) & 1) << (n - 1 - b)
    return rev


@dataclass(frozen=True, eq=False)
class GeneratorStructure:
    """Generator rows of a code built from the Kronecker kernel.

    ``kind`` is ``"reed-muller"``, ``"kronecker-power"`` or
    ``"systematic-from-H"``; ``params`` carries ``(r, n)`` or ``(n,)``.
    With ``bit_reversed`` the rows of the Kronecker power were reordered by
    the bit-reversal permutation (the polar ordering ``B_N G^{(x)n}``).
    """

    kind: str
    params: tuple[int, ...]
    rows: np.ndarray
    bit_reversed: bool = False

    @property
    def length(self) -> int:
        return self.rows.shape[1]

    @property
    def dimension(self) -> int:
        return self.rows.shape[0]

    def encode(self, message) -> np.ndarray:
        u = np.asarray(message, dtype=np.int64)
        if u.size != self.dimension:
            raise ValueError(f"message length must be {self.dimension}")
        return gf2.matmul(u[None, :], self.rows)[0]


def kronecker_generator(n: int, bit_reversed: bool = False) -> GeneratorStructure:
    G = kronecker_power(n)
    if bit_reversed:
        G = G[bit_reversal_permutation(n)]
    return GeneratorStructure("kronecker-power", (n,), G, bit_reversed)


def _rm_rows(r: int, n: int) -> np.ndarray:
    G = kronecker_power(n)
    if r < 0:
        return np.zeros((0, 1 << n), dtype=np.uint8)
    weights = G.sum(axis=1)
    return G[weights >= (1 << (n - r))]


def build_rm_code(r: int, n: int) -> tuple[GeneratorStructure, ParityCheckMatrix]:
    """Reed-Muller code RM(r, n) and a parity-check matrix for it.

    The generator keeps the rows of the n-fold Kronecker power with Hamming
    weight at least ``2**(n - r)``. The check matrix is the generator of the
    dual code RM(n - r - 1, n); for ``r == n`` it has no rows.
    """
    if not 0 <= r <= n:
        raise ValueError(f"need 0 <= r <= n, got r={r}, n={n}")
    if n > 10:
        raise ValueError("dense construction limited to n <= 10")
    G = _rm_rows(r, n)
    assert G.shape[0] == sum(comb(n, i) for i in range(r + 1))
    D = _rm_rows(n - r - 1, n)
    H = ParityCheckMatrix.from_dense(D) if D.shape[0] else ParityCheckMatrix(0, 1 << n, ())
    return GeneratorStructure("reed-muller", (r, n), G), H
