"""LP-relaxation constraint systems for parity checks and trellises.

Variable names follow fixed patterns so that systems built by different
modules can refer to each other's variables:

* ``f/{code}/{j}``            bit ``j`` of codeword ``code``
* ``v/{check}/{subset}``      local-codeword indicator; ``subset`` is the
  comma-joined bit indices, ``-`` for the empty set
* ``aux/{check}/{k}``         auxiliary bit introduced by check decomposition
* ``flow/{nu}/{section}/{edge}`` flow on trellis edge ``edge``
* ``x/{nu}/{j}``              turbo codeword bits (``nu`` in ``a``, ``b``, ``s``)
"""

from __future__ import annotations

from dataclasses import dataclass
from itertools import combinations
from typing import Iterable, Mapping, Sequence

import numpy as np
import scipy.sparse as sp

ROLES = ("bit", "permuted-bit", "aux", "indicator", "flow", "weight")
D_MAX = 10


class DegreeError(ValueError):
    pass


@dataclass(frozen=True)
class Row:
    index: np.ndarray
    value: np.ndarray
    rhs: float
    tag: str


class LinearConstraintSystem:
    """Named real variables with sparse equalities ``a.z = b``, inequalities
    ``a.z <= b`` and per-variable box bounds."""

    def __init__(self):
        self.names: list[str] = []
        self.roles: list[str] = []
        self.lower: list[float] = []
        self.upper: list[float] = []
        self._index: dict[str, int] = {}
        self.equalities: list[Row] = []
        self.inequalities: list[Row] = []
        self.frozen = False

    def __len__(self):
        return len(self.names)

    @property
    def num_variables(self) -> int:
        return len(self.names)

    def _check_mutable(self):
        if self.frozen:
            raise RuntimeError("constraint system is frozen")

    def freeze(self) -> "LinearConstraintSystem":
        self.frozen = True
        return self

    def copy(self) -> "LinearConstraintSystem":
        other = LinearConstraintSystem()
        other.names = list(self.names)
        other.roles = list(self.roles)
        other.lower = list(self.lower)
        other.upper = list(self.upper)
        other._index = dict(self._index)
        other.equalities = list(self.equalities)
        other.inequalities = list(self.inequalities)
        return other

    def add_variable(self, name: str, role: str, lower: float = -np.inf, upper: float = np.inf) -> int:
        """Register ``name``; re-registering intersects the bounds."""
        self._check_mutable()
        if role not in ROLES:
            raise ValueError(f"unknown role {role!r}")
        if role in ("bit", "permuted-bit", "aux", "indicator"):
            lower, upper = max(lower, 0.0), min(upper, 1.0)
        idx = self._index.get(name)
        if idx is not None:
            if self.roles[idx] != role:
                raise ValueError(f"{name} already registered with role {self.roles[idx]}")
            self.lower[idx] = max(self.lower[idx], lower)
            self.upper[idx] = min(self.upper[idx], upper)
            return idx
        idx = len(self.names)
        self._index[name] = idx
        self.names.append(name)
        self.roles.append(role)
        self.lower.append(float(lower))
        self.upper.append(float(upper))
        return idx

    def index(self, name: str) -> int:
        try:
            return self._index[name]
        except KeyError:
            raise KeyError(f"unknown variable {name}") from None

    def __contains__(self, name: str) -> bool:
        return name in self._index

    def with_role(self, role: str) -> list[str]:
        return [n for n, r in zip(self.names, self.roles) if r == role]

    def _row(self, coeffs: Mapping[str | int, float], rhs: float, tag: str) -> Row:
        acc: dict[int, float] = {}
        for key, val in coeffs.items():
            idx = key if isinstance(key, (int, np.integer)) else self.index(key)
            if not 0 <= idx < len(self.names):
                raise KeyError(f"variable index {idx} out of range")
            acc[int(idx)] = acc.get(int(idx), 0.0) + float(val)
        acc = {k: v for k, v in acc.items() if v != 0.0}
        if not acc:
            raise ValueError(f"empty constraint row {tag!r}")
        keys = sorted(acc)
        return Row(np.array(keys, dtype=np.int64), np.array([acc[k] for k in keys]), float(rhs), tag)

    def add_equality(self, coeffs: Mapping[str | int, float], rhs: float, tag: str = "") -> None:
        self._check_mutable()
        self.equalities.append(self._row(coeffs, rhs, tag))

    def add_inequality(self, coeffs: Mapping[str | int, float], rhs: float, tag: str = "") -> None:
        self._check_mutable()
        self.inequalities.append(self._row(coeffs, rhs, tag))

    @staticmethod
    def _stack(rows: Sequence[Row], n: int) -> tuple[sp.csr_matrix, np.ndarray]:
        if not rows:
            return sp.csr_matrix((0, n)), np.zeros(0)
        indptr = np.zeros(len(rows) + 1, dtype=np.int64)
        indptr[1:] = np.cumsum([r.index.size for r in rows])
        idx = np.concatenate([r.index for r in rows])
        val = np.concatenate([r.value for r in rows])
        return sp.csr_matrix((val, idx, indptr), shape=(len(rows), n)), np.array([r.rhs for r in rows])

    def equality_matrix(self) -> tuple[sp.csr_matrix, np.ndarray]:
        return self._stack(self.equalities, self.num_variables)

    def inequality_matrix(self) -> tuple[sp.csr_matrix, np.ndarray]:
        return self._stack(self.inequalities, self.num_variables)

    def bounds(self) -> tuple[np.ndarray, np.ndarray]:
        return np.array(self.lower), np.array(self.upper)

    def point(self, values: Mapping[str, float], default: float = 0.0) -> np.ndarray:
        z = np.full(self.num_variables, default, dtype=float)
        for name, v in values.items():
            z[self.index(name)] = v
        return z

    def violation(self, z) -> float:
        """Largest violation of any equality, inequality or bound at ``z``."""
        z = np.asarray(z, dtype=float)
        worst = 0.0
        A, b = self.equality_matrix()
        if A.shape[0]:
            worst = max(worst, float(np.max(np.abs(A @ z - b))))
        G, h = self.inequality_matrix()
        if G.shape[0]:
            worst = max(worst, float(np.max(G @ z - h)))
        lo, hi = self.bounds()
        if z.size:
            worst = max(worst, float(np.max(lo - z)), float(np.max(z - hi)))
        return worst

    def is_feasible(self, z, tol: float = 1e-9) -> bool:
        return self.violation(z) <= tol

    def dump(self) -> str:
        """Plain-text LP-style listing in insertion order."""

        def fmt_bound(x):
            return "inf" if x == np.inf else "-inf" if x == -np.inf else repr(float(x))

        def fmt_row(r: Row, sense: str, k: int, prefix: str) -> str:
            terms = " ".join(f"{'+' if v >= 0 else '-'} {abs(v)!r} {self.names[i]}" for i, v in zip(r.index, r.value))
            label = f"{prefix}{k}" + (f"[{r.tag}]" if r.tag else "")
            return f"{label}: {terms} {sense} {r.rhs!r}"

        out = ["\\ variables"]
        out += [f"{n} {role} [{fmt_bound(lo)}, {fmt_bound(hi)}]"
                for n, role, lo, hi in zip(self.names, self.roles, self.lower, self.upper)]
        out.append("\\ equalities")
        out += [fmt_row(r, "=", k, "e") for k, r in enumerate(self.equalities)]
        out.append("\\ inequalities")
        out += [fmt_row(r, "<=", k, "u") for k, r in enumerate(self.inequalities)]
        return "\n".join(out) + "\n"


def bit_name(code: str, j: int) -> str:
    return f"f/{code}/{j}"


def subset_key(S: Iterable[int]) -> str:
    S = sorted(S)
    return ",".join(str(j) for j in S) if S else "-"


def _check_degree(N, d_max, what):
    if len(N) > d_max:
        raise DegreeError(f"check degree {len(N)} exceeds d_max={d_max} for the {what} formulation; "
                          "use decompose_check instead")
    if len(set(N)) != len(N):
        raise ValueError("duplicate bit index in check neighborhood")


def exact_check_constraints(N: Sequence[int], sys: LinearConstraintSystem, check: str | int = 0,
                            code: str = "c", d_max: int = D_MAX) -> LinearConstraintSystem:
    """Local-codeword formulation of one check.

    One indicator per even-size subset of ``N`` (the empty set included),
    the indicators summing to one, and each bit equal to the total weight
    of the subsets containing it.
    """
    N = list(N)
    _check_degree(N, d_max, "exact")
    for j in N:
        sys.add_variable(bit_name(code, j), "bit", 0.0, 1.0)
    indicators: list[tuple[int, tuple[int, ...]]] = []
    for size in range(0, len(N) + 1, 2):
        for S in combinations(N, size):
            idx = sys.add_variable(f"v/{check}/{subset_key(S)}", "indicator", 0.0, 1.0)
            indicators.append((idx, S))
    sys.add_equality({idx: 1.0 for idx, _ in indicators}, 1.0, tag=f"sum-v/{check}")
    for j in N:
        coeffs: dict[str | int, float] = {idx: 1.0 for idx, S in indicators if j in S}
        coeffs[bit_name(code, j)] = -1.0
        sys.add_equality(coeffs, 0.0, tag=f"consistency/{check}/{j}")
    return sys


def fs_check_constraints(N: Sequence[int], sys: LinearConstraintSystem, check: str | int = 0,
                         code: str = "c", d_max: int = D_MAX) -> LinearConstraintSystem:
    """Forbidden-set inequalities of one check plus [0,1] boxes on its bits."""
    N = list(N)
    _check_degree(N, d_max, "forbidden-set")
    for j in N:
        sys.add_variable(bit_name(code, j), "bit", 0.0, 1.0)
    for size in range(1, len(N) + 1, 2):
        for F in combinations(N, size):
            Fs = set(F)
            coeffs = {bit_name(code, j): (1.0 if j in Fs else -1.0) for j in N}
            sys.add_inequality(coeffs, size - 1.0, tag=f"fs/{check}/{subset_key(F)}")
    return sys


def _triangle(sys: LinearConstraintSystem, a: str, b: str, c: str, tag: str) -> None:
    sys.add_inequality({a: 1.0, b: -1.0, c: -1.0}, 0.0, tag=tag)
    sys.add_inequality({b: 1.0, a: -1.0, c: -1.0}, 0.0, tag=tag)
    sys.add_inequality({c: 1.0, a: -1.0, b: -1.0}, 0.0, tag=tag)
    sys.add_inequality({a: 1.0, b: 1.0, c: 1.0}, 2.0, tag=tag)


def decompose_check(N: Sequence[int], sys: LinearConstraintSystem, check: str | int = 0,
                    code: str = "c") -> LinearConstraintSystem:
    """Split a check into a left-to-right chain of degree-3 checks.

    Degree 2 becomes ``f1 = f2``; degree 3 gets the four triangle/sum
    inequalities plus [0,1] boxes; degree ``d > 3`` introduces ``d - 3``
    auxiliary bits and ``d - 2`` such groups:
    ``(f1, f2, a1), (a1, f3, a2), ..., (a_{d-3}, f_{d-1}, f_d)``.
    """
    N = list(N)
    if len(N) < 2:
        raise DegreeError("decomposition needs degree >= 2; fix a degree-1 bit to 0 with its bounds")
    if len(set(N)) != len(N):
        raise ValueError("duplicate bit index in check neighborhood")
    names = [bit_name(code, j) for j in N]
    for nm in names:
        sys.add_variable(nm, "bit", 0.0, 1.0)
    if len(N) == 2:
        sys.add_equality({names[0]: 1.0, names[1]: -1.0}, 0.0, tag=f"dec/{check}/0")
        return sys
    left = names[0]
    for k in range(len(N) - 3):
        aux = f"aux/{check}/{k}"
        sys.add_variable(aux, "aux", 0.0, 1.0)
        _triangle(sys, left, names[k + 1], aux, tag=f"dec/{check}/{k}")
        left = aux
    _triangle(sys, left, names[-2], names[-1], tag=f"dec/{check}/{len(N) - 3}")
    return sys


FORMULATIONS = {"exact": exact_check_constraints, "fs": fs_check_constraints, "decomposed": decompose_check}


def code_constraints(H, formulation: str = "exact", sys: LinearConstraintSystem | None = None,
                     code: str = "c", d_max: int = D_MAX) -> LinearConstraintSystem:
    """Constraints of every check of ``H``; all ``n`` bits get [0,1] boxes.

    Degree-1 checks are handled by fixing the bit's upper bound to 0.
    """
    if formulation not in FORMULATIONS:
        raise ValueError(f"unknown formulation {formulation!r}; choose from {sorted(FORMULATIONS)}")
    sys = LinearConstraintSystem() if sys is None else sys
    for j in range(H.n):
        sys.add_variable(bit_name(code, j), "bit", 0.0, 1.0)
    for i, N in enumerate(H.neighborhoods):
        label = f"{code}:{i}"
        if len(N) == 1:
            sys.add_variable(bit_name(code, N[0]), "bit", 0.0, 0.0)
        elif formulation == "decomposed":
            decompose_check(N, sys, check=label, code=code)
        else:
            FORMULATIONS[formulation](N, sys, check=label, code=code, d_max=d_max)
    return sys


def flow_name(nu: str, edge) -> str:
    return f"flow/{nu}/{edge.section}/{edge.index}"


def flow_constraints(trellis, sys: LinearConstraintSystem, nu: str = "a") -> LinearConstraintSystem:
    """Unit flow from the start node to the end node of ``trellis``."""
    names = [flow_name(nu, e) for e in trellis.edges]
    for nm in names:
        sys.add_variable(nm, "flow", 0.0, np.inf)
    sys.add_equality({names[e]: 1.0 for e in trellis.out_edges[trellis.start]}, 1.0, tag=f"source/{nu}")
    sys.add_equality({names[e]: 1.0 for e in trellis.in_edges[trellis.end]}, 1.0, tag=f"sink/{nu}")
    for node in range(trellis.num_nodes):
        if node in (trellis.start, trellis.end):
            continue
        outs, ins = trellis.out_edges[node], trellis.in_edges[node]
        if not outs and not ins:
            continue
        coeffs: dict[str | int, float] = {}
        for e in outs:
            coeffs[names[e]] = coeffs.get(names[e], 0.0) + 1.0
        for e in ins:
            coeffs[names[e]] = coeffs.get(names[e], 0.0) - 1.0
        sys.add_equality(coeffs, 0.0, tag=f"conserve/{nu}/{node}")
    return sys


def turbo_connecting_constraints(trellis_a, trellis_b, perm, sys: LinearConstraintSystem) -> LinearConstraintSystem:
    """Tie the flows of two constituent trellises to turbo codeword bits.

    ``x/a/j`` and ``x/b/j`` equal the flow through edges emitting a 1 at
    output position ``j``; ``x/s/j`` equals the flow through input-1 edges
    of section ``j`` of trellis ``a``, and ``x/s/perm[j]`` the flow through
    input-1 edges of section ``j`` of trellis ``b``. Flow constraints for
    either trellis are added if missing.
    """
    L = trellis_a.frame_length
    if trellis_b.frame_length != L:
        raise ValueError("constituent trellises have different frame lengths")
    if perm.length != L:
        raise ValueError(f"permutation length {perm.length} != frame length {L}")
    for nu, tr in (("a", trellis_a), ("b", trellis_b)):
        if flow_name(nu, tr.edges[0]) not in sys:
            flow_constraints(tr, sys, nu)
        for j in range(tr.code_length):
            x = sys.add_variable(f"x/{nu}/{j}", "bit", 0.0, 1.0)
            coeffs: dict[str | int, float] = {flow_name(nu, tr.edges[e]): 1.0 for e in tr.output_ones(j)}
            coeffs[x] = -1.0
            sys.add_equality(coeffs, 0.0, tag=f"connect-out/{nu}/{j}")
    for j in range(L):
        sys.add_variable(f"x/s/{j}", "bit", 0.0, 1.0)
    for j in range(L):
        coeffs = {flow_name("a", trellis_a.edges[e]): 1.0 for e in trellis_a.input_ones(j)}
        coeffs[f"x/s/{j}"] = -1.0
        sys.add_equality(coeffs, 0.0, tag=f"connect-sys/a/{j}")
        coeffs = {flow_name("b", trellis_b.edges[e]): 1.0 for e in trellis_b.input_ones(j)}
        coeffs[f"x/s/{int(perm.mapping[j])}"] = -1.0
        sys.add_equality(coeffs, 0.0, tag=f"connect-sys/b/{j}")
    return sys
