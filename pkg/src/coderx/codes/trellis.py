"""Trellises of (optionally recursive) convolutional encoders.

Polynomial convention: a generator ``g`` with ``K`` bits taps the shift
register ``(a_t, a_{t-1}, ..., a_{t-K+1})`` with its most significant
bit on the newest entry ``a_t``. ``(5, 7)`` is therefore ``1 + D^2`` and
``1 + D + D^2``. The encoder state is the integer whose bits, most
significant first, are ``(a_{t-1}, ..., a_{t-K+1})``.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

import numpy as np


def parse_octal_list(spec: str | Sequence) -> list[int]:
    """Parse ``"5,7"`` or ``["5", "7"]`` as octal; plain ints pass through unchanged."""
    if isinstance(spec, str):
        spec = [s for s in spec.replace(" ", "").split(",") if s]
    out = []
    for item in spec:
        out.append(int(item, 8) if isinstance(item, str) else int(item))
    return out


def _parity(x: int) -> int:
    return bin(x).count("1") & 1


@dataclass(frozen=True)
class Edge:
    index: int
    section: int
    source: int  # node id
    target: int  # node id
    from_state: int
    to_state: int
    input_bit: int | None  # None on the zero-output merge edges of open trellises
    outputs: tuple[int, ...]


@dataclass(eq=False)
class Trellis:
    """State-transition graph with one start node and one end node.

    Node ``section * num_states + state`` stands for encoder ``state``
    before section ``section``. Open (unterminated) trellises get one extra
    sink node fed by zero-output merge edges.
    """

    generators: tuple[int, ...]
    feedback: int | None
    memory: int
    frame_length: int
    terminated: bool
    num_sections: int
    outputs_per_section: int
    num_nodes: int
    start: int
    end: int
    edges: list[Edge]
    out_edges: list[list[int]] = field(repr=False)
    in_edges: list[list[int]] = field(repr=False)

    @property
    def num_states(self) -> int:
        return 1 << self.memory

    @property
    def code_length(self) -> int:
        return self.num_sections * self.outputs_per_section

    def node(self, section: int, state: int) -> int:
        return section * self.num_states + state

    def output_ones(self, j: int) -> list[int]:
        """Edges carrying a 1 at codeword position ``j``."""
        return self._output_index[j]

    def input_ones(self, j: int) -> list[int]:
        """Edges of information section ``j`` whose input bit is 1."""
        return self._input_index[j]

    def __post_init__(self):
        self._output_index: list[list[int]] = [[] for _ in range(self.code_length)]
        self._input_index: list[list[int]] = [[] for _ in range(self.frame_length)]
        for e in self.edges:
            for b, bit in enumerate(e.outputs):
                if bit:
                    self._output_index[e.section * self.outputs_per_section + b].append(e.index)
            if e.input_bit == 1 and e.section < self.frame_length:
                self._input_index[e.section].append(e.index)

    def step(self, state: int, u: int) -> tuple[int, tuple[int, ...]]:
        return _step(self.generators, self.feedback, self.memory, state, u)

    def tail_input(self, state: int) -> int:
        """Input that shifts a zero into the register (drives the state toward 0)."""
        if self.feedback is None:
            return 0
        return _parity(state & self.feedback)

    def path_for_input(self, bits) -> list[int]:
        """Edge indices traversed when encoding ``bits`` (tail appended if terminated)."""
        bits = [int(b) for b in bits]
        if len(bits) != self.frame_length:
            raise ValueError(f"need {self.frame_length} input bits")
        by_key = {(e.source, e.input_bit): e.index for e in self.edges}
        node, path = self.start, []
        for b in bits:
            eid = by_key[(node, b)]
            path.append(eid)
            node = self.edges[eid].target
        for _ in range(self.num_sections - self.frame_length):
            state = self.edges[path[-1]].to_state if path else 0
            eid = by_key[(node, self.tail_input(state))]
            path.append(eid)
            node = self.edges[eid].target
        if not self.terminated:
            eid = by_key[(node, None)]
            path.append(eid)
            node = self.edges[eid].target
        assert node == self.end
        return path

    def path_outputs(self, path: Sequence[int]) -> np.ndarray:
        return np.array([b for eid in path for b in self.edges[eid].outputs], dtype=np.uint8)

    def path_inputs(self, path: Sequence[int]) -> np.ndarray:
        """Information bits along a path (tail and merge edges excluded)."""
        return np.array([self.edges[eid].input_bit for eid in path
                         if self.edges[eid].section < self.frame_length], dtype=np.uint8)


def _step(gens, feedback, memory, state, u):
    a = u ^ _parity(state & feedback) if feedback is not None else u
    reg = (a << memory) | state
    return reg >> 1, tuple(_parity(reg & g) for g in gens)


def build_conv_trellis(generator_polynomials, frame_length: int, terminated: bool = True,
                       feedback=None) -> Trellis:
    """Trellis of a rate ``1/len(generators)`` convolutional encoder over ``frame_length`` inputs.

    Every state of every section is materialized (``2**(K-1)`` per
    section), so the first sections also carry edges leaving states the
    start cannot reach. Terminated trellises append ``K-1`` tail sections
    with a single forced input per state and end in state 0. ``feedback``
    (octal, newest tap in the MSB, which must be set) makes the encoder
    recursive.
    """
    gens = tuple(parse_octal_list(generator_polynomials))
    if not gens:
        raise ValueError("at least one generator polynomial is required")
    if any(g <= 0 for g in gens):
        raise ValueError("generator polynomials must be positive")
    fb = None
    if feedback is not None:
        (fb,) = parse_octal_list([feedback] if not isinstance(feedback, (list, tuple)) else feedback)
    K = max(g.bit_length() for g in gens + ((fb,) if fb else ()))
    if K > 8:
        raise ValueError("constraint length above 8 is not supported")
    if frame_length < 1:
        raise ValueError("frame_length must be >= 1")
    memory = K - 1
    if fb is not None:
        if not (fb >> memory) & 1:
            raise ValueError("feedback polynomial must tap the newest register entry")
        fb &= (1 << memory) - 1
    S = 1 << memory
    tail = memory if terminated else 0
    T = frame_length + tail
    num_nodes = (T + 1) * S + (0 if terminated else 1)
    edges: list[Edge] = []

    def add(section, s_from, s_to, u, outs, target=None):
        src = section * S + s_from
        dst = (section + 1) * S + s_to if target is None else target
        edges.append(Edge(len(edges), section, src, dst, s_from, s_to, u, outs))

    for t in range(T):
        for s in range(S):
            if t < frame_length:
                for u in (0, 1):
                    nxt, outs = _step(gens, fb, memory, s, u)
                    add(t, s, nxt, u, outs)
            else:
                u = _parity(s & fb) if fb is not None else 0
                nxt, outs = _step(gens, fb, memory, s, u)
                add(t, s, nxt, u, outs)
    start = 0
    if terminated:
        end = T * S
    else:
        end = num_nodes - 1
        for s in range(S):
            add(T, s, 0, None, (), target=end)
    out_edges: list[list[int]] = [[] for _ in range(num_nodes)]
    in_edges: list[list[int]] = [[] for _ in range(num_nodes)]
    for e in edges:
        out_edges[e.source].append(e.index)
        in_edges[e.target].append(e.index)
    return Trellis(gens, fb, memory, frame_length, terminated, T, len(gens), num_nodes,
                   start, end, edges, out_edges, in_edges)


def conv_encode(generator_polynomials, bits, terminated: bool = True, feedback=None) -> np.ndarray:
    """Shift-register encoder, independent of the trellis graph."""
    gens = parse_octal_list(generator_polynomials)
    fb = parse_octal_list([feedback])[0] if feedback is not None else None
    K = max(g.bit_length() for g in gens + ([fb] if fb else []))
    reg = [0] * K  # reg[0] is the newest entry
    out = []

    def shift_in(u):
        if fb is not None:
            a = u
            for d in range(1, K):
                if (fb >> (K - 1 - d)) & 1:
                    a ^= reg[d - 1]
        else:
            a = u
        reg.insert(0, a)
        reg.pop()
        for g in gens:
            acc = 0
            for d in range(K):
                if (g >> (K - 1 - d)) & 1:
                    acc ^= reg[d]
            out.append(acc)

    for u in bits:
        shift_in(int(u))
    if terminated:
        for _ in range(K - 1):
            if fb is None:
                shift_in(0)
            else:
                # choose the input that makes the fed-back value zero
                fbsum = 0
                for d in range(1, K):
                    if (fb >> (K - 1 - d)) & 1:
                        fbsum ^= reg[d - 1]
                shift_in(fbsum)
    return np.array(out, dtype=np.uint8)
