"""Joint beamforming and decoding anchored on the target user's code."""

from __future__ import annotations

import math
from functools import lru_cache

import numpy as np
import scipy.sparse as sp

from .. import polytope
from ..codes import ParityCheckMatrix, Permutation
from ..optim import QuadraticProgram, SolverSettings, solve_qp
from .beamformers import E_TARGET, ReceiverWeights
from .decoding import DecodeResult

SQRT2 = math.sqrt(2.0)


@lru_cache(maxsize=8)
def _code_template(code: ParityCheckMatrix, formulation: str, d_max: int) -> polytope.LinearConstraintSystem:
    return polytope.code_constraints(code, formulation, d_max=d_max).freeze()


def _sqrt_factor(R: np.ndarray) -> np.ndarray:
    """``L`` with ``R = L L'`` (Cholesky, or a symmetric square root for singular PSD ``R``)."""
    try:
        return np.linalg.cholesky(R)
    except np.linalg.LinAlgError:
        vals, vecs = np.linalg.eigh(R)
        return vecs * np.sqrt(np.clip(vals, 0.0, None))


def joint_qp_program(R_loaded, H_hat, alpha: float, snapshots, code: ParityCheckMatrix, perm: Permutation,
                     formulation: str = "exact", d_max: int = polytope.D_MAX) -> QuadraticProgram:
    """Assemble the code-anchored program.

    Variables: the code relaxation's own variables (bits ``f/c/j``,
    indicators or auxiliaries), the weights ``w/R/i`` and ``w/I/i``, and the
    lifted images ``s/R/i``, ``s/I/i`` (``s = L' w`` with ``R = L L'``) and
    ``r/k`` (``r = (I2 (x) H')w - e``). The cost is ``||s||^2 + alpha ||r||^2``,
    which equals ``w'(I2 (x) R)w + alpha ||(I2 (x) H')w - e||^2`` on the
    feasible set but has a diagonal Hessian, which the ADMM solver handles
    far better than the dense ``R + alpha H H'`` block.

    Snapshot ``t`` ties ``w_R . y_t`` to bit ``perm[2t]`` and ``w_I . y_t``
    to bit ``perm[2t+1]`` of the unpermuted codeword, so no permuted copies
    of the bits are created.
    """
    R = np.asarray(R_loaded, dtype=float)
    H = np.asarray(H_hat, dtype=float)
    Y = np.asarray(snapshots, dtype=float)
    T, dim = Y.shape
    if 2 * T != code.n:
        raise ValueError(f"{T} snapshots carry {2 * T} bits but the code length is {code.n}")
    if perm.length != code.n:
        raise ValueError("permutation length differs from code length")
    if R.shape != (dim, dim) or H.shape != (dim, 2):
        raise ValueError("covariance / channel estimate dimensions do not match the snapshots")
    if not alpha > 0:
        raise ValueError("alpha must be positive")
    sys = _code_template(code, formulation, d_max).copy()
    wR = [sys.add_variable(f"w/R/{i}", "weight") for i in range(dim)]
    wI = [sys.add_variable(f"w/I/{i}", "weight") for i in range(dim)]
    bit = [sys.index(polytope.bit_name("c", j)) for j in range(code.n)]
    mp = perm.mapping
    for t in range(T):
        row = dict(zip(wR, Y[t]))
        row[bit[mp[2 * t]]] = -2.0 / SQRT2
        sys.add_equality(row, -1.0 / SQRT2, tag=f"map/R/{t}")
        row = dict(zip(wI, Y[t]))
        row[bit[mp[2 * t + 1]]] = 2.0 / SQRT2
        sys.add_equality(row, 1.0 / SQRT2, tag=f"map/I/{t}")
    L = _sqrt_factor(R)
    lifted = []
    for part, ws in (("R", wR), ("I", wI)):
        for i in range(dim):
            s = sys.add_variable(f"s/{part}/{i}", "weight")
            lifted.append(s)
            row = {ws[k]: -L[k, i] for k in np.flatnonzero(L[:, i])}
            row[s] = 1.0
            sys.add_equality(row, 0.0, tag=f"lift/{part}/{i}")
    resid = []
    for k, (ws, c) in enumerate(((wR, 0), (wR, 1), (wI, 0), (wI, 1))):
        r = sys.add_variable(f"r/{k}", "weight")
        resid.append(r)
        row = {ws[i]: -H[i, c] for i in np.flatnonzero(H[:, c])}
        row[r] = 1.0
        sys.add_equality(row, -E_TARGET[k], tag=f"distortion/{k}")
    n = sys.num_variables
    diag = np.zeros(n)
    diag[lifted] = 2.0
    diag[resid] = 2.0 * alpha
    return QuadraticProgram(sp.diags(diag).tocsc(), np.zeros(n), sys.freeze())


def joint_qp_decode(R_loaded, H_hat, alpha: float, snapshots, code: ParityCheckMatrix, perm: Permutation,
                    formulation: str = "exact", settings: SolverSettings | None = None,
                    gamma: float | None = None) -> tuple[ReceiverWeights, DecodeResult]:
    """Solve the code-anchored QP and round the unpermuted bits at 0.5."""
    qp = joint_qp_program(R_loaded, H_hat, alpha, snapshots, code, perm, formulation)
    rep = solve_qp(qp, settings)
    sys = qp.system
    dim = np.asarray(snapshots).shape[1]
    w = np.concatenate([rep.x[[sys.index(f"w/R/{i}") for i in range(dim)]],
                        rep.x[[sys.index(f"w/I/{i}") for i in range(dim)]]])
    f = rep.x[[sys.index(polytope.bit_name("c", j)) for j in range(code.n)]]
    weights = ReceiverWeights.from_vector(w, "joint-qp", gamma=gamma, alpha=alpha)
    return weights, DecodeResult.from_soft(np.clip(f, 0.0, 1.0), rep.objective, rep)
