"""Built-in code families: Hamming(7,4) and pseudo-random regular LDPC codes."""

from __future__ import annotations

from ..rng import Xoshiro256, derive_seed
from .parity import ParityCheckMatrix

HAMMING_7_4 = ParityCheckMatrix.from_neighborhoods(
    7, [(0, 2, 4, 6), (1, 2, 5, 6), (3, 4, 5, 6)]
)


def hamming_7_4() -> ParityCheckMatrix:
    return HAMMING_7_4


def regular_ldpc(n: int, m: int, bit_degree: int, seed: int = 0, max_attempts: int = 200) -> ParityCheckMatrix:
    """Pseudo-random (bit_degree, n*bit_degree/m)-regular LDPC parity-check matrix.

    Columns are filled left to right. Each column picks its checks one at a
    time among the checks of lowest current degree that are not yet full,
    preferring checks that share no bit with checks already chosen for the
    column (this keeps the Tanner graph free of 4-cycles whenever
    possible). Ties are broken with a :class:`~coderx.rng.Xoshiro256`
    stream. Attempt ``a`` uses the stream ``derive_seed(seed, a)``; the
    first attempt giving a full-rank, exactly regular matrix is returned.
    """
    if (n * bit_degree) % m:
        raise ValueError("n * bit_degree must be divisible by m")
    check_degree = n * bit_degree // m
    if check_degree > n or bit_degree > m:
        raise ValueError("degrees exceed matrix dimensions")
    for attempt in range(max_attempts):
        rng = Xoshiro256(derive_seed(seed, attempt))
        H = _fill(n, m, bit_degree, check_degree, rng)
        if H is not None and H.rank == m:
            return H
    raise RuntimeError(f"no full-rank regular matrix found in {max_attempts} attempts")


def _fill(n, m, dv, dc, rng):
    rows: list[set[int]] = [set() for _ in range(m)]
    for j in range(n):
        chosen: list[int] = []
        blocked: set[int] = set()  # checks sharing a bit with an already chosen check
        for _ in range(dv):
            open_ = [i for i in range(m) if len(rows[i]) < dc and i not in chosen]
            if not open_:
                return None
            preferred = [i for i in open_ if i not in blocked] or open_
            low = min(len(rows[i]) for i in preferred)
            cands = [i for i in preferred if len(rows[i]) == low]
            pick = cands[rng.integers(len(cands))]
            chosen.append(pick)
            for other in rows[pick]:
                for i in range(m):
                    if other in rows[i]:
                        blocked.add(i)
        for i in chosen:
            rows[i].add(j)
    if any(len(r) != dc for r in rows):
        return None
    return ParityCheckMatrix.from_neighborhoods(n, rows)
