"""Convex QP/LP solver (ADMM operator splitting) and dense linear-solve helpers.

Problems are handled in the form

    minimize    1/2 x'Px + q'x + r
    subject to  l <= A x <= u

where equality rows have ``l == u`` and box bounds are identity rows of
``A``. The iteration is the alternating-direction scheme with a
quasi-definite KKT system

    [P + sigma I     A'      ] [x~]   [sigma x - q   ]
    [    A       -diag(1/rho)] [nu] = [z - y / rho   ]

over-relaxation ``alpha``, per-row penalties (equality rows get 1e3 times
the base penalty) rebalanced from the ratio of primal and dual residuals,
Ruiz equilibration of the data, dual-increment infeasibility certificates
and a final active-set polishing solve.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import TextIO

import numpy as np
import scipy.linalg as la
import scipy.sparse as sp
import scipy.sparse.linalg as spla

from .polytope import LinearConstraintSystem

OPTIMAL = "optimal"
MAX_ITER = "max-iterations"
INFEASIBLE = "infeasible"

RHO_MIN, RHO_MAX = 1e-6, 1e6
RHO_EQ_FACTOR = 1e3


class NotConvexError(ValueError):
    pass


class SingularMatrixError(np.linalg.LinAlgError):
    def __init__(self, cond: float):
        super().__init__(f"matrix is singular to working precision (condition estimate {cond:.3e})")
        self.cond = cond


@dataclass
class SolverSettings:
    rho: float = 0.1
    sigma: float = 1e-6
    alpha: float = 1.6
    max_iter: int = 50_000
    eps_abs: float = 1e-8
    eps_rel: float = 1e-8
    eps_infeasible: float = 1e-7
    check_every: int = 25
    adapt_every: int = 100
    adaptive_rho: bool = True
    scaling_iters: int = 10
    polish: bool = True
    polish_refine: int = 5
    trace: TextIO | None = None


@dataclass
class SolveReport:
    x: np.ndarray
    objective: float
    status: str
    primal_residual: float
    dual_residual: float
    iterations: int
    y: np.ndarray | None = None
    polished: bool = False
    trace: list[dict] = field(default_factory=list, repr=False)

    @property
    def optimal(self) -> bool:
        return self.status == OPTIMAL


@dataclass
class QuadraticProgram:
    """``1/2 z'Pz + q'z + offset`` over the feasible set of ``system``."""

    P: sp.spmatrix | np.ndarray
    q: np.ndarray
    system: LinearConstraintSystem
    offset: float = 0.0

    def __post_init__(self):
        n = self.system.num_variables
        self.P = sp.csc_matrix(self.P)
        self.q = np.asarray(self.q, dtype=float).ravel()
        if self.P.shape != (n, n) or self.q.size != n:
            raise ValueError(f"cost dimensions {self.P.shape}/{self.q.size} do not match {n} variables")
        asym = abs(self.P - self.P.T)
        if asym.nnz and asym.max() > 1e-10:
            raise ValueError("cost matrix is not symmetric")

    @property
    def dimension(self) -> int:
        return self.q.size

    def objective(self, z) -> float:
        z = np.asarray(z, dtype=float)
        return float(0.5 * z @ (self.P @ z) + self.q @ z + self.offset)


def check_psd(P: sp.spmatrix, tol: float = 1e-10) -> None:
    """Cholesky of the nonzero principal block of ``P`` with a small shift."""
    P = sp.csc_matrix(P)
    support = np.unique(P.nonzero()[0])
    if support.size == 0:
        return
    block = P[support][:, support].toarray()
    shift = tol * max(1.0, float(np.max(np.abs(np.diag(block)))))
    try:
        np.linalg.cholesky(block + shift * np.eye(support.size))
    except np.linalg.LinAlgError:
        raise NotConvexError("cost matrix is not positive semidefinite") from None


def solve_linear_system(A, B, cond_limit: float = 1e12) -> np.ndarray:
    """Solve ``A X = B`` for square, well-conditioned ``A``."""
    A = np.asarray(A, dtype=float)
    B = np.asarray(B, dtype=float)
    if A.ndim != 2 or A.shape[0] != A.shape[1]:
        raise ValueError("A must be square")
    cond = float(np.linalg.cond(A))
    if not np.isfinite(cond) or cond > cond_limit:
        raise SingularMatrixError(cond)
    sym = np.allclose(A, A.T, rtol=0, atol=1e-14 * max(1.0, np.abs(A).max()))
    X = la.solve(A, B, assume_a="sym" if sym else "gen")
    # one step of iterative refinement keeps the residual at the roundoff level
    X = X + la.solve(A, B - A @ X, assume_a="sym" if sym else "gen")
    return X


def standard_form(system: LinearConstraintSystem) -> tuple[sp.csc_matrix, np.ndarray, np.ndarray]:
    """Stack equalities, inequalities and finite boxes into ``l <= A x <= u``."""
    n = system.num_variables
    Aeq, beq = system.equality_matrix()
    Aub, bub = system.inequality_matrix()
    lo, hi = system.bounds()
    boxed = np.flatnonzero(np.isfinite(lo) | np.isfinite(hi))
    Abox = sp.csr_matrix((np.ones(boxed.size), (np.arange(boxed.size), boxed)), shape=(boxed.size, n))
    A = sp.vstack([Aeq, Aub, Abox], format="csc")
    l = np.concatenate([beq, np.full(bub.size, -np.inf), lo[boxed]])
    u = np.concatenate([beq, bub, hi[boxed]])
    return A, l, u


def _inf_norm_cols(M: sp.csc_matrix) -> np.ndarray:
    M = abs(sp.csc_matrix(M))
    out = M.max(axis=0).toarray().ravel() if M.shape[0] else np.zeros(M.shape[1])
    return out


def _inf_norm_rows(M: sp.csr_matrix) -> np.ndarray:
    M = abs(sp.csr_matrix(M))
    return M.max(axis=1).toarray().ravel() if M.shape[1] else np.zeros(M.shape[0])


def _limit(v: np.ndarray) -> np.ndarray:
    v = np.where(v < 1e-4, 1.0, v)
    return np.clip(v, 1e-4, 1e4)


def _norm(v: np.ndarray) -> float:
    return float(np.max(np.abs(v))) if v.size else 0.0


class _Admm:
    def __init__(self, P, q, A, l, u, settings: SolverSettings):
        self.s = settings
        n, m = q.size, A.shape[0]
        self.n, self.m = n, m
        self.P0, self.q0, self.A0, self.l0, self.u0 = P, q, A, l, u
        self._scale()
        self.eq = (self.u0 - self.l0) < 1e-12 * np.maximum(1.0, np.abs(self.u0))
        self.eq &= np.isfinite(self.l0)
        self.loose = ~np.isfinite(self.l0) & ~np.isfinite(self.u0)
        self.rho = settings.rho
        self.rho_vec = self._rho_vector(self.rho)
        self._factor()

    def _scale(self):
        P, q, A = self.P0.tocsc(), self.q0.copy(), self.A0.tocsc()
        n, m = self.q0.size, A.shape[0]
        D, E, c = np.ones(n), np.ones(m), 1.0
        for _ in range(self.s.scaling_iters):
            cols = np.maximum(_inf_norm_cols(P), _inf_norm_cols(A)) if m else _inf_norm_cols(P)
            d = 1.0 / np.sqrt(_limit(cols))
            e = 1.0 / np.sqrt(_limit(_inf_norm_rows(A))) if m else np.ones(0)
            Dd, Ee = sp.diags(d), sp.diags(e)
            P = (Dd @ P @ Dd).tocsc()
            A = (Ee @ A @ Dd).tocsc()
            q = d * q
            D *= d
            E *= e
            pcols = _inf_norm_cols(P)
            # a (near-)zero linear term must not drive the cost scale
            qnorm = float(_limit(np.array([_norm(q)]))[0])
            gamma = max(float(np.mean(pcols)) if pcols.size else 0.0, qnorm)
            gamma = 1.0 / float(_limit(np.array([gamma]))[0])
            P = P * gamma
            q = q * gamma
            c *= gamma
        self.P, self.q, self.A = P, q, A
        self.D, self.E, self.c = D, E, c
        with np.errstate(invalid="ignore"):
            self.l = E * self.l0
            self.u = E * self.u0

    def _rho_vector(self, rho):
        r = np.full(self.m, rho)
        r[self.eq] = RHO_EQ_FACTOR * rho
        r[self.loose] = RHO_MIN
        return r

    def _factor(self):
        n = self.n
        K = sp.bmat([[self.P + self.s.sigma * sp.eye(n), self.A.T],
                     [self.A, sp.diags(-1.0 / self.rho_vec)]], format="csc")
        # quasi-definite: any symmetric ordering is stable without pivoting
        self.lu = spla.splu(K, permc_spec="MMD_AT_PLUS_A", diag_pivot_thresh=0.0,
                            options={"SymmetricMode": True})

    # residuals in the original (unscaled) problem
    def residuals(self, x, z, y):
        Dinv, Einv = 1.0 / self.D, 1.0 / self.E
        Ax = self.A @ x
        Px = self.P @ x
        Aty = self.A.T @ y
        prim = _norm(Einv * (Ax - z))
        prim_scale = max(_norm(Einv * Ax), _norm(Einv * z))
        dual = _norm(Dinv * (Px + self.q + Aty)) / self.c
        dual_scale = max(_norm(Dinv * Px), _norm(Dinv * Aty), _norm(Dinv * self.q)) / self.c
        return prim, dual, prim_scale, dual_scale, Ax, Px, Aty

    def unscale(self, x, z, y):
        return self.D * x, z / self.E, self.E * y / self.c

    def objective(self, x_unscaled):
        return float(0.5 * x_unscaled @ (self.P0 @ x_unscaled) + self.q0 @ x_unscaled)

    def primal_infeasible(self, dy) -> bool:
        dy_u = self.E * dy
        norm_dy = _norm(dy_u)
        if norm_dy < 1e-30:
            return False
        eps = self.s.eps_infeasible
        if _norm(self.A0.T @ dy_u) > eps * norm_dy:
            return False
        pos, neg = np.maximum(dy_u, 0.0), np.minimum(dy_u, 0.0)
        tiny = eps * norm_dy * 1e-3
        if np.any((pos > tiny) & ~np.isfinite(self.u0)) or np.any((neg < -tiny) & ~np.isfinite(self.l0)):
            return False
        support = np.where(np.isfinite(self.u0), self.u0, 0.0) @ np.where(pos > tiny, pos, 0.0)
        support += np.where(np.isfinite(self.l0), self.l0, 0.0) @ np.where(neg < -tiny, neg, 0.0)
        return support < -eps * norm_dy

    def polish(self, x, z, y):
        """Solve the equality-constrained problem on the guessed active set."""
        low = (z - self.l < -y) | self.eq
        upp = (self.u - z < y) | self.eq
        low &= np.isfinite(self.l)
        upp &= np.isfinite(self.u)
        upp &= ~low  # rows active at both ends are equalities; keep one copy
        act = np.flatnonzero(low | upp)
        rhs_b = np.where(low[act], self.l[act], self.u[act])
        Aa = self.A[act]
        n, k = self.n, act.size
        delta = 1e-9
        K0 = sp.bmat([[self.P, Aa.T], [Aa, None]], format="csc") if k else self.P.tocsc()
        Kd = sp.bmat([[self.P + delta * sp.eye(n), Aa.T], [Aa, -delta * sp.eye(k)]], format="csc") if k \
            else (self.P + delta * sp.eye(n)).tocsc()
        try:
            lu = spla.splu(Kd, permc_spec="COLAMD")
        except RuntimeError:
            return None
        rhs = np.concatenate([-self.q, rhs_b])
        sol = lu.solve(rhs)
        for _ in range(self.s.polish_refine):
            sol = sol + lu.solve(rhs - K0 @ sol)
        if not np.all(np.isfinite(sol)):
            return None
        xp = sol[:n]
        yp = np.zeros(self.m)
        yp[act] = sol[n:]
        zp = np.clip(self.A @ xp, self.l, self.u)
        return xp, zp, yp

    def run(self, x0=None, y0=None) -> SolveReport:
        s = self.s
        n, m = self.n, self.m
        x = np.zeros(n) if x0 is None else np.asarray(x0, float) / self.D
        y = np.zeros(m) if y0 is None else np.asarray(y0, float) * self.c / self.E
        z = np.clip(self.A @ x, self.l, self.u)
        trace: list[dict] = []
        status, it = MAX_ITER, 0
        prim = dual = math.inf
        for it in range(1, s.max_iter + 1):
            rhs = np.concatenate([s.sigma * x - self.q, z - y / self.rho_vec])
            sol = self.lu.solve(rhs)
            xt, nu = sol[:n], sol[n:]
            zt = z + (nu - y) / self.rho_vec
            x = s.alpha * xt + (1.0 - s.alpha) * x
            zr = s.alpha * zt + (1.0 - s.alpha) * z
            z_new = np.clip(zr + y / self.rho_vec, self.l, self.u)
            dy = self.rho_vec * (zr - z_new)
            y = y + dy
            z = z_new
            if it % s.check_every and it != s.max_iter:
                continue
            prim, dual, ps, ds, Ax, Px, Aty = self.residuals(x, z, y)
            xu = self.D * x
            entry = {"iter": it, "primal": prim, "dual": dual, "objective": self.objective(xu), "rho": self.rho}
            trace.append(entry)
            if s.trace is not None:
                s.trace.write(f"{it} {prim:.6e} {dual:.6e} {entry['objective']:.12e} {self.rho:.3e}\n")
            if prim <= s.eps_abs + s.eps_rel * ps and dual <= s.eps_abs + s.eps_rel * ds:
                status = OPTIMAL
                break
            if self.primal_infeasible(dy):
                status = INFEASIBLE
                break
            if s.adaptive_rho and it % s.adapt_every == 0:
                sp_ = self.A @ x
                num = _norm(sp_ - z) / max(_norm(sp_), _norm(z), 1e-30)
                den = _norm(Px + self.q + Aty) / max(_norm(Px), _norm(Aty), _norm(self.q), 1e-30)
                if den > 1e-30:
                    new_rho = float(np.clip(self.rho * math.sqrt(num / den), RHO_MIN, RHO_MAX))
                    if new_rho > 5.0 * self.rho or new_rho < self.rho / 5.0:
                        y_keep = y
                        self.rho = new_rho
                        self.rho_vec = self._rho_vector(new_rho)
                        self._factor()
                        y = y_keep
        polished = False
        if status != INFEASIBLE and s.polish and m:
            cand = self.polish(x, z, y)
            if cand is not None:
                pprim, pdual, pps, pds, *_ = self.residuals(*cand)
                ok_p = pprim <= max(prim, s.eps_abs + s.eps_rel * pps)
                ok_d = pdual <= max(dual, s.eps_abs + s.eps_rel * pds)
                if ok_p and ok_d:
                    x, z, y = cand
                    prim, dual, polished = pprim, pdual, True
                    if prim <= s.eps_abs + s.eps_rel * pps and dual <= s.eps_abs + s.eps_rel * pds:
                        status = OPTIMAL
        xu, zu, yu = self.unscale(x, z, y)
        return SolveReport(xu, self.objective(xu), status, prim, dual, it, yu, polished, trace)


def solve_qp(qp: QuadraticProgram, settings: SolverSettings | None = None,
             warm_x=None, warm_y=None) -> SolveReport:
    """Minimize a convex quadratic over a :class:`LinearConstraintSystem`."""
    settings = settings or SolverSettings()
    check_psd(qp.P)
    A, l, u = standard_form(qp.system)
    rep = _Admm(qp.P, qp.q, A, l, u, settings).run(warm_x, warm_y)
    rep.objective += qp.offset
    for entry in rep.trace:
        entry["objective"] += qp.offset
    return rep


def solve_lp(cost, system: LinearConstraintSystem, settings: SolverSettings | None = None) -> SolveReport:
    """Minimize ``cost . z`` over ``system``."""
    cost = np.asarray(cost, dtype=float).ravel()
    n = system.num_variables
    if n == 0:
        raise ValueError("empty constraint system")
    if cost.size != n:
        raise ValueError(f"cost has {cost.size} entries for {n} variables")
    qp = QuadraticProgram(sp.csc_matrix((n, n)), cost, system)
    return solve_qp(qp, settings)
