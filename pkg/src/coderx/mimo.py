"""Real-field multi-user MIMO uplink: channels, pilot contamination, covariance, 4-QAM.

Conventions
-----------
* Complex channel of user ``k``: ``h[k]`` of length ``N_r``, entries
  CN(0, g_k). Draw order: user, antenna, then real part before imaginary.
* Real model: ``y = [Re y~; Im y~]``, ``x_k = [Re x~_k; Im x~_k]`` and
  ``H_k = [[Re h_k, -Im h_k], [Im h_k, Re h_k]]`` (``2 N_r x 2``).
* Sequences are stored time-major: symbols ``(T, 2)``, snapshots
  ``(T, 2 N_r)``.
* SNR is the target user's average received power per antenna over the
  complex noise power per antenna: ``SNR = g_1 / (2 sigma_n^2)`` for unit
  symbol energy, with ``sigma_n^2`` the variance per real dimension.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .rng import Xoshiro256

INV_SQRT2 = 1.0 / math.sqrt(2.0)


@dataclass(frozen=True, eq=False)
class ComplexChannel:
    h: np.ndarray  # (N_u, N_r) complex
    gains: tuple[float, ...]

    def __post_init__(self):
        if not np.all(np.isfinite(self.h)):
            raise ValueError("channel has non-finite entries")
        if self.h.shape[0] != len(self.gains):
            raise ValueError("one gain per user required")

    @property
    def num_users(self) -> int:
        return self.h.shape[0]

    @property
    def num_antennas(self) -> int:
        return self.h.shape[1]


@dataclass(frozen=True, eq=False)
class RealChannelModel:
    H: np.ndarray  # (2 N_r, 2 N_u)
    noise_var: float = 0.0

    @property
    def num_antennas(self) -> int:
        return self.H.shape[0] // 2

    @property
    def num_users(self) -> int:
        return self.H.shape[1] // 2

    def block(self, k: int) -> np.ndarray:
        return self.H[:, 2 * k:2 * k + 2]


@dataclass(frozen=True, eq=False)
class ChannelEstimate:
    H_hat: np.ndarray  # (2 N_r, 2)
    contaminators: tuple[int, ...]
    noise_var: float


@dataclass(frozen=True, eq=False)
class CovarianceEstimate:
    R_hat: np.ndarray
    R_loaded: np.ndarray
    gamma: float
    snapshots: int


def real_block(h: np.ndarray) -> np.ndarray:
    h = np.asarray(h, dtype=complex)
    return np.block([[h.real[:, None], -h.imag[:, None]], [h.imag[:, None], h.real[:, None]]])


def complex_to_real(channel: ComplexChannel, noise_var: float = 0.0) -> RealChannelModel:
    H = np.hstack([real_block(hk) for hk in channel.h]) if channel.num_users else np.zeros((2 * channel.num_antennas, 0))
    return RealChannelModel(H, noise_var)


def real_vector(v: np.ndarray) -> np.ndarray:
    v = np.asarray(v)
    return np.concatenate([v.real, v.imag])


def draw_channels(num_antennas: int, gains: Sequence[float], rng: Xoshiro256) -> ComplexChannel:
    """I.i.d. CN(0, g_k) entries for every user ``k``."""
    gains = tuple(float(g) for g in gains)
    if any(not g > 0 for g in gains):
        raise ValueError("channel power gains must be positive")
    draws = rng.normals((len(gains), num_antennas, 2))
    scale = np.sqrt(np.array(gains) / 2.0)[:, None]
    h = (draws[..., 0] + 1j * draws[..., 1]) * scale
    return ComplexChannel(h, gains)


def contaminated_estimate(target: np.ndarray, interferers: Sequence[np.ndarray], noise_var: float,
                          rng: Xoshiro256 | None = None, indices: Sequence[int] = ()) -> ChannelEstimate:
    """``H_hat = H_target + sum(H_j) + N`` with N i.i.d. N(0, noise_var) per real entry."""
    H = np.array(target, dtype=float)
    for Hj in interferers:
        if np.shape(Hj) != H.shape:
            raise ValueError("interferer block shape differs from target block")
        H = H + Hj
    if noise_var > 0:
        if rng is None:
            raise ValueError("an rng is required for nonzero estimation noise")
        H = H + math.sqrt(noise_var) * rng.normals(H.shape)
    return ChannelEstimate(H, tuple(indices), float(noise_var))


def map_bits_to_symbols(bits) -> np.ndarray:
    """Gray 4-QAM: bits ``(2t, 2t+1)`` give ``((2b0 - 1), (1 - 2b1)) / sqrt(2)``."""
    b = np.asarray(bits, dtype=float)
    if b.ndim != 1 or b.size % 2:
        raise ValueError("bit sequence must have even length")
    return np.stack([(2.0 * b[0::2] - 1.0), (1.0 - 2.0 * b[1::2])], axis=1) * INV_SQRT2


def slice_symbols(symbols) -> np.ndarray:
    """Hard decisions matching :func:`map_bits_to_symbols`; a zero component decides 0."""
    s = np.asarray(symbols, dtype=float)
    bits = np.empty(2 * s.shape[0], dtype=np.uint8)
    bits[0::2] = s[:, 0] > 0
    bits[1::2] = s[:, 1] < 0
    return bits


def noise_variance_for_snr(snr_db: float, target_gain: float) -> float:
    """Per-real-dimension noise variance giving ``snr_db`` for the target user."""
    return target_gain / (2.0 * 10.0 ** (snr_db / 10.0))


def transmit_frame(model: RealChannelModel, symbols: Sequence[np.ndarray], noise_var: float,
                   rng: Xoshiro256 | None = None) -> np.ndarray:
    """Snapshots ``y_t = H x_t + n_t`` as a ``(T, 2 N_r)`` array."""
    if len(symbols) != model.num_users:
        raise ValueError(f"expected {model.num_users} symbol sequences, got {len(symbols)}")
    lengths = {np.shape(s)[0] for s in symbols}
    if len(lengths) != 1:
        raise ValueError("all users must send equally long symbol sequences")
    X = np.hstack([np.asarray(s, dtype=float) for s in symbols])  # (T, 2 N_u)
    Y = X @ model.H.T
    if noise_var > 0:
        if rng is None:
            raise ValueError("an rng is required for nonzero noise")
        Y = Y + math.sqrt(noise_var) * rng.normals(Y.shape)
    return Y


def estimate_covariance(snapshots, gamma: float = 0.0) -> CovarianceEstimate:
    """Sample covariance ``(1/T) sum y_t y_t'`` and its diagonally loaded version."""
    Y = np.atleast_2d(np.asarray(snapshots, dtype=float))
    if Y.shape[0] == 0 or Y.size == 0:
        raise ValueError("no snapshots")
    if gamma < 0:
        raise ValueError("loading factor must be non-negative")
    R = Y.T @ Y / Y.shape[0]
    R = 0.5 * (R + R.T)
    return CovarianceEstimate(R, R + gamma * np.eye(R.shape[0]), float(gamma), Y.shape[0])
