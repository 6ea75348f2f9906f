"""Parity-check matrices, the alist interchange format and systematic encoding."""

from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property

import numpy as np

from . import gf2


class AlistError(ValueError):
    """Malformed alist text. ``line`` is 1-based."""

    def __init__(self, message: str, line: int):
        super().__init__(f"line {line}: {message}")
        self.line = line


@dataclass(frozen=True, eq=False)
class ParityCheckMatrix:
    """Sparse binary matrix over GF(2): rows are checks, columns are bits.

    ``neighborhoods[i]`` lists, in increasing order, the 0-based bit
    indices taking part in check ``i``.
    """

    m: int
    n: int
    neighborhoods: tuple[tuple[int, ...], ...]

    def __post_init__(self):
        if len(self.neighborhoods) != self.m:
            raise ValueError(f"expected {self.m} checks, got {len(self.neighborhoods)}")
        for i, nb in enumerate(self.neighborhoods):
            if not nb:
                raise ValueError(f"check {i} has an empty neighborhood")
            if len(set(nb)) != len(nb):
                raise ValueError(f"check {i} has duplicate entries")
            if min(nb) < 0 or max(nb) >= self.n:
                raise ValueError(f"check {i} has a bit index outside [0, {self.n})")
            if list(nb) != sorted(nb):
                raise ValueError(f"check {i} neighborhood is not sorted")

    @classmethod
    def from_dense(cls, H) -> "ParityCheckMatrix":
        H = np.asarray(H) % 2
        m, n = H.shape
        return cls(m, n, tuple(tuple(int(j) for j in np.flatnonzero(row)) for row in H))

    @classmethod
    def from_neighborhoods(cls, n: int, neighborhoods) -> "ParityCheckMatrix":
        nbs = tuple(tuple(sorted(int(j) for j in nb)) for nb in neighborhoods)
        return cls(len(nbs), n, nbs)

    def to_dense(self) -> np.ndarray:
        H = np.zeros((self.m, self.n), dtype=np.uint8)
        for i, nb in enumerate(self.neighborhoods):
            H[i, list(nb)] = 1
        return H

    def __eq__(self, other):
        if not isinstance(other, ParityCheckMatrix):
            return NotImplemented
        return (self.m, self.n, self.neighborhoods) == (other.m, other.n, other.neighborhoods)

    def __hash__(self):
        return hash((self.m, self.n, self.neighborhoods))

    @property
    def entries(self) -> set[tuple[int, int]]:
        return {(i, j) for i, nb in enumerate(self.neighborhoods) for j in nb}

    @cached_property
    def column_neighborhoods(self) -> tuple[tuple[int, ...], ...]:
        cols: list[list[int]] = [[] for _ in range(self.n)]
        for i, nb in enumerate(self.neighborhoods):
            for j in nb:
                cols[j].append(i)
        return tuple(tuple(c) for c in cols)

    @property
    def check_degrees(self) -> list[int]:
        return [len(nb) for nb in self.neighborhoods]

    @property
    def bit_degrees(self) -> list[int]:
        return [len(c) for c in self.column_neighborhoods]

    def syndrome(self, c) -> np.ndarray:
        c = np.asarray(c, dtype=np.int64)
        return np.array([int(c[list(nb)].sum()) & 1 for nb in self.neighborhoods], dtype=np.uint8)

    def is_codeword(self, c) -> bool:
        return not self.syndrome(c).any()

    @cached_property
    def rank(self) -> int:
        return gf2.rank(self.to_dense())

    @property
    def dimension(self) -> int:
        return self.n - self.rank

    @cached_property
    def encoder(self) -> "SystematicEncoder":
        return SystematicEncoder(self)


class SystematicEncoder:
    """Encoder obtained from the reduced row echelon form of H.

    Non-pivot columns become the information positions, so the message
    appears verbatim at ``info_positions`` of the codeword and every
    codeword satisfies the original, unpermuted H.
    """

    def __init__(self, H: ParityCheckMatrix):
        R, pivots = gf2.row_reduce(H.to_dense())
        self.n = H.n
        self.parity_positions = np.array(pivots, dtype=np.int64)
        pivot_set = set(pivots)
        self.info_positions = np.array([j for j in range(H.n) if j not in pivot_set], dtype=np.int64)
        self.k = len(self.info_positions)
        # parity bits as a function of the message
        self._parity_map = R[:, self.info_positions].astype(np.int64)

    @cached_property
    def generator(self) -> np.ndarray:
        """Generator matrix (k x n) whose row t encodes the t-th unit message."""
        return np.stack([self.encode(row) for row in np.eye(self.k, dtype=np.uint8)]) if self.k else np.zeros((0, self.n), np.uint8)

    def encode(self, message) -> np.ndarray:
        u = np.asarray(message, dtype=np.int64)
        if u.ndim != 1 or u.size != self.k:
            raise ValueError(f"message length must be {self.k}, got {u.size}")
        if np.any((u != 0) & (u != 1)):
            raise ValueError("message entries must be 0 or 1")
        c = np.zeros(self.n, dtype=np.uint8)
        c[self.info_positions] = u
        c[self.parity_positions] = (self._parity_map @ u) % 2
        return c

    def extract(self, codeword) -> np.ndarray:
        return np.asarray(codeword, dtype=np.uint8)[self.info_positions]


def encode(H: ParityCheckMatrix, message) -> np.ndarray:
    """Systematically encode ``message`` into a codeword of ``H``."""
    return H.encoder.encode(message)


def parse_alist(text: str) -> ParityCheckMatrix:
    """Parse MacKay's alist format.

    Layout: ``n m``; ``max_col_weight max_row_weight``; n column weights;
    m row weights; n lines of 1-based row indices per column; m lines of
    1-based column indices per row. Lines may be zero-padded to the
    maximum weight.
    """
    lines = [(no, ln.split()) for no, ln in enumerate(text.splitlines(), start=1)]
    lines = [(no, toks) for no, toks in lines if toks]
    pos = 0

    def take(expected: int | None, what: str) -> tuple[int, list[int]]:
        nonlocal pos
        if pos >= len(lines):
            last = lines[-1][0] if lines else 0
            raise AlistError(f"unexpected end of input while reading {what}", last + 1)
        no, toks = lines[pos]
        pos += 1
        try:
            vals = [int(t) for t in toks]
        except ValueError:
            raise AlistError(f"non-integer token in {what}", no) from None
        if expected is not None and len(vals) != expected:
            raise AlistError(f"{what}: expected {expected} values, got {len(vals)}", no)
        return no, vals

    no, (n, m) = take(2, "header dimensions")
    if n <= 0 or m < 0:
        raise AlistError("dimensions must be positive", no)
    no, (max_cw, max_rw) = take(2, "maximum weights")
    no, col_w = take(n, "column weights")
    if any(w < 0 or w > max_cw for w in col_w):
        raise AlistError("column weight outside [0, max]", no)
    if m:
        no, row_w = take(m, "row weights")
        if any(w < 1 or w > max_rw for w in row_w):
            raise AlistError("row weight outside [1, max]", no)
    else:
        row_w = []

    def adjacency(count: int, weights: list[int], bound: int, what: str) -> tuple[list[list[int]], list[int]]:
        lists, line_nos = [], []
        for idx in range(count):
            no, vals = take(None, f"{what} {idx + 1}")
            nz = [v for v in vals if v != 0]
            if len(nz) != weights[idx]:
                raise AlistError(f"{what} {idx + 1}: expected {weights[idx]} entries, got {len(nz)}", no)
            if any(v < 0 or v > bound for v in nz):
                raise AlistError(f"{what} {idx + 1}: index out of range 1..{bound}", no)
            if len(set(nz)) != len(nz):
                raise AlistError(f"{what} {idx + 1}: duplicate index", no)
            lists.append([v - 1 for v in nz])
            line_nos.append(no)
        return lists, line_nos

    cols, _ = adjacency(n, col_w, m, "column")
    rows, row_lines = adjacency(m, row_w, n, "row")
    by_row: list[set[int]] = [set() for _ in range(m)]
    for j, c in enumerate(cols):
        for i in c:
            by_row[i].add(j)
    for i, r in enumerate(rows):
        if set(r) != by_row[i]:
            raise AlistError(f"row {i + 1} disagrees with the column lists", row_lines[i])
    return ParityCheckMatrix.from_neighborhoods(n, rows)


def serialize_alist(H: ParityCheckMatrix) -> str:
    """Write ``H`` as zero-padded alist text (inverse of :func:`parse_alist`)."""
    cols = H.column_neighborhoods
    max_cw = max((len(c) for c in cols), default=0)
    max_rw = max((len(r) for r in H.neighborhoods), default=0)

    def padded(idx, width):
        vals = [i + 1 for i in idx] + [0] * (width - len(idx))
        return " ".join(str(v) for v in vals)

    out = [f"{H.n} {H.m}", f"{max_cw} {max_rw}",
           " ".join(str(len(c)) for c in cols)]
    if H.m:
        out.append(" ".join(str(len(r)) for r in H.neighborhoods))
    out += [padded(c, max(max_cw, 1)) for c in cols]
    out += [padded(r, max_rw) for r in H.neighborhoods]
    return "\n".join(out) + "\n"
