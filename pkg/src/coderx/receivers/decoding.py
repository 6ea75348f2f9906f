"""LP decoding over code polytopes and trellis flow polytopes, plus exact oracles."""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field

import numpy as np

from .. import polytope
from ..optim import SolveReport, SolverSettings, solve_lp

INTEGRAL_TOL = 1e-5
TIE_TOL = 1e-9


def round_bits(soft) -> np.ndarray:
    """``f >= 0.5 -> 1``; values within 1e-9 of 0.5 count as ties and give 0."""
    f = np.asarray(soft, dtype=float)
    return ((f >= 0.5) & (np.abs(f - 0.5) > TIE_TOL)).astype(np.uint8)


@dataclass
class DecodeResult:
    bits: np.ndarray
    soft: np.ndarray
    integral: bool
    objective: float
    report: SolveReport | None = None
    path: list[int] | None = field(default=None)

    @classmethod
    def from_soft(cls, soft, objective, report=None, path=None) -> "DecodeResult":
        soft = np.asarray(soft, dtype=float)
        integral = bool(soft.size == 0 or np.max(np.abs(soft - np.round(soft))) <= INTEGRAL_TOL)
        return cls(round_bits(soft), soft, integral, float(objective), report, path)


def _lp_settings(settings):
    return settings or SolverSettings()


def lp_decode(code, llr, formulation: str = "exact", settings: SolverSettings | None = None,
              d_max: int = polytope.D_MAX) -> DecodeResult:
    """Minimize ``sum_j llr_j f_j`` over the chosen relaxation of ``code``.

    ``llr_j = log P(y_j | 0) / P(y_j | 1)``, so positive values favour 0.
    """
    llr = np.asarray(llr, dtype=float)
    if llr.size != code.n:
        raise ValueError(f"llr has length {llr.size}, code length is {code.n}")
    sys = polytope.code_constraints(code, formulation, d_max=d_max)
    bit_idx = [sys.index(polytope.bit_name("c", j)) for j in range(code.n)]
    cost = np.zeros(sys.num_variables)
    cost[bit_idx] = llr
    rep = solve_lp(cost, sys, _lp_settings(settings))
    soft = np.clip(rep.x[bit_idx], 0.0, 1.0)
    return DecodeResult.from_soft(soft, rep.objective, rep)


def branch_costs_from_llr(trellis, llr) -> np.ndarray:
    """Edge cost ``sum_b llr[pos_b] * out_b`` over the bits an edge emits."""
    llr = np.asarray(llr, dtype=float)
    if llr.size != trellis.code_length:
        raise ValueError(f"llr has length {llr.size}, trellis emits {trellis.code_length} bits")
    n_out = trellis.outputs_per_section
    costs = np.zeros(len(trellis.edges))
    for e in trellis.edges:
        for b, bit in enumerate(e.outputs):
            if bit:
                costs[e.index] += llr[e.section * n_out + b]
    return costs


def lp_decode_trellis(trellis, branch_costs, settings: SolverSettings | None = None) -> DecodeResult:
    """Min-cost unit flow through the trellis.

    ``soft`` holds the edge flows; for integral solutions ``path`` lists the
    chosen edges and ``bits`` the decoded information bits.
    """
    costs = np.asarray(branch_costs, dtype=float)
    if costs.size != len(trellis.edges) or not np.all(np.isfinite(costs)):
        raise ValueError("need one finite cost per edge")
    sys = polytope.flow_constraints(trellis, polytope.LinearConstraintSystem(), "a")
    idx = [sys.index(polytope.flow_name("a", e)) for e in trellis.edges]
    cost = np.zeros(sys.num_variables)
    cost[idx] = costs
    rep = solve_lp(cost, sys, _lp_settings(settings))
    flows = rep.x[idx]
    integral = bool(np.max(np.abs(flows - np.round(flows))) <= INTEGRAL_TOL)
    path = None
    bits = np.zeros(0, dtype=np.uint8)
    if integral:
        path = _trace_path(trellis, flows)
        bits = trellis.path_inputs(path) if path is not None else bits
        integral = path is not None
    return DecodeResult(bits, flows, integral, rep.objective, rep, path)


def _trace_path(trellis, flows):
    node, path = trellis.start, []
    while node != trellis.end:
        nxt = [e for e in trellis.out_edges[node] if flows[e] > 0.5]
        if len(nxt) != 1:
            return None
        path.append(nxt[0])
        node = trellis.edges[nxt[0]].target
    return path


def ml_decode_bruteforce(code, llr, max_dimension: int = 16) -> np.ndarray:
    """Exact ML codeword by enumerating all ``2**k`` messages.

    Ties (within 1e-12 relative) go to the lexicographically smallest codeword.
    """
    llr = np.asarray(llr, dtype=float)
    if llr.size != code.n:
        raise ValueError("llr length differs from code length")
    enc = code.encoder
    if enc.k > max_dimension:
        raise ValueError(f"code dimension {enc.k} exceeds {max_dimension}")
    msgs = np.array(list(itertools.product((0, 1), repeat=enc.k)), dtype=np.int64).reshape(-1, enc.k)
    C = (msgs @ enc.generator.astype(np.int64)) % 2
    costs = C @ llr
    best = costs.min()
    tol = 1e-12 * max(1.0, abs(best), float(np.abs(llr).sum()))
    ties = C[costs <= best + tol]
    order = np.lexsort(ties.T[::-1])
    return ties[order[0]].astype(np.uint8)


def viterbi_decode(trellis, branch_costs) -> tuple[list[int], float]:
    """Minimum-metric start-to-end path.

    Each node keeps the incoming edge with the smallest ``(metric, edge
    index)``. Node ids increase along sections, so one pass suffices.
    """
    costs = np.asarray(branch_costs, dtype=float)
    best = np.full(trellis.num_nodes, np.inf)
    back = np.full(trellis.num_nodes, -1, dtype=np.int64)
    best[trellis.start] = 0.0
    for node in range(trellis.num_nodes):
        if node == trellis.start or not trellis.in_edges[node]:
            continue
        for e in sorted(trellis.in_edges[node]):
            m = best[trellis.edges[e].source] + costs[e]
            if m < best[node]:
                best[node], back[node] = m, e
    path, node = [], trellis.end
    while node != trellis.start:
        e = int(back[node])
        if e < 0:
            raise ValueError("end state unreachable")
        path.append(e)
        node = trellis.edges[e].source
    path.reverse()
    return path, float(sum(costs[e] for e in path))
