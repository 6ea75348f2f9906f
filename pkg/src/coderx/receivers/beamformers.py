"""Linear receive beamformers for the target user's 2x2 real block."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..optim import solve_linear_system

E_TARGET = np.array([1.0, 0.0, 0.0, 1.0])  # [e1; e2]


@dataclass(frozen=True, eq=False)
class ReceiverWeights:
    """``W`` is ``2 N_r x 2``; the vectorized form is ``w = [w_R; w_I]`` (columns of W)."""

    W: np.ndarray
    tag: str
    gamma: float | None = None
    alpha: float | None = None

    @property
    def w(self) -> np.ndarray:
        return np.concatenate([self.W[:, 0], self.W[:, 1]])

    @classmethod
    def from_vector(cls, w, tag: str, gamma=None, alpha=None) -> "ReceiverWeights":
        w = np.asarray(w, dtype=float)
        half = w.size // 2
        return cls(np.stack([w[:half], w[half:]], axis=1), tag, gamma, alpha)

    def apply(self, snapshots) -> np.ndarray:
        """Symbol estimates ``W' y_t`` as a ``(T, 2)`` array."""
        return np.asarray(snapshots, dtype=float) @ self.W


def _require_full_rank(H):
    if np.linalg.matrix_rank(H) < H.shape[1]:
        raise np.linalg.LinAlgError("channel estimate is rank deficient")


def dlmv_weights(R_loaded, H_hat, gamma: float | None = None) -> ReceiverWeights:
    """Minimum-variance weights ``R^-1 H (H' R^-1 H)^-1`` (satisfy ``W'H = I``)."""
    R = np.asarray(R_loaded, dtype=float)
    H = np.asarray(H_hat, dtype=float)
    _require_full_rank(H)
    RiH = solve_linear_system(R, H)
    W = RiH @ solve_linear_system(H.T @ RiH, np.eye(H.shape[1]))
    return ReceiverWeights(W, "dlmv", gamma=gamma)


def dlmv_kkt_residual(R_loaded, H_hat, W) -> float:
    """Largest of the constraint violation ``W'H - I`` and the stationarity
    residual ``R W - H M`` with the best-fitting multiplier ``M``."""
    R, H, W = (np.asarray(a, dtype=float) for a in (R_loaded, H_hat, W))
    feas = np.abs(W.T @ H - np.eye(H.shape[1])).max()
    G = R @ W
    M, *_ = np.linalg.lstsq(H, G, rcond=None)
    return float(max(feas, np.abs(G - H @ M).max()))


def qp_objective(R_loaded, H_hat, alpha: float, w) -> float:
    """``w'(I2 (x) R)w + alpha ||(I2 (x) H')w - e||^2``."""
    W = ReceiverWeights.from_vector(w, "qp").W
    R, H = np.asarray(R_loaded, float), np.asarray(H_hat, float)
    resid = np.concatenate([H.T @ W[:, 0], H.T @ W[:, 1]]) - E_TARGET
    return float(np.trace(W.T @ R @ W) + alpha * resid @ resid)


def qp_gradient(R_loaded, H_hat, alpha: float, w) -> np.ndarray:
    W = ReceiverWeights.from_vector(w, "qp").W
    R, H = np.asarray(R_loaded, float), np.asarray(H_hat, float)
    G = 2.0 * R @ W + 2.0 * alpha * H @ (H.T @ W - np.eye(2))
    return np.concatenate([G[:, 0], G[:, 1]])


def qp_weights(R_loaded, H_hat, alpha: float, gamma: float | None = None) -> ReceiverWeights:
    """Regularized weights ``alpha (R + alpha H H')^-1 H`` (the unconstrained minimizer)."""
    if not alpha > 0:
        raise ValueError("alpha must be positive")
    R = np.asarray(R_loaded, dtype=float)
    H = np.asarray(H_hat, dtype=float)
    W = alpha * solve_linear_system(R + alpha * H @ H.T, H)
    return ReceiverWeights(W, "qp", gamma=gamma, alpha=alpha)
