"""Dense linear algebra over GF(2) on uint8 arrays."""

from __future__ import annotations

import numpy as np


def row_reduce(M: np.ndarray) -> tuple[np.ndarray, list[int]]:
    """Reduced row echelon form over GF(2).

    Returns the reduced matrix (zero rows dropped) and the pivot columns in
    increasing order.
    """
    R = np.array(M, dtype=np.uint8) & 1
    rows, cols = R.shape
    pivots: list[int] = []
    r = 0
    for c in range(cols):
        if r == rows:
            break
        hits = np.flatnonzero(R[r:, c])
        if hits.size == 0:
            continue
        p = r + hits[0]
        if p != r:
            R[[r, p]] = R[[p, r]]
        others = np.flatnonzero(R[:, c])
        others = others[others != r]
        R[others] ^= R[r]
        pivots.append(c)
        r += 1
    return R[:r], pivots


def rank(M: np.ndarray) -> int:
    return len(row_reduce(M)[1])


def null_space(M: np.ndarray) -> np.ndarray:
    """Basis of ``{x : M x = 0}`` as rows, one per non-pivot column."""
    R, pivots = row_reduce(M)
    n = M.shape[1]
    free = [c for c in range(n) if c not in set(pivots)]
    B = np.zeros((len(free), n), dtype=np.uint8)
    for k, fc in enumerate(free):
        B[k, fc] = 1
        B[k, pivots] = R[:, fc]
    return B


def matmul(A: np.ndarray, B: np.ndarray) -> np.ndarray:
    return (np.asarray(A, dtype=np.int64) @ np.asarray(B, dtype=np.int64) % 2).astype(np.uint8)
