"""Monte Carlo BER sweep over an SNR grid.

Every frame draws from its own stream ``derive_seed(seed, snr_index,
frame)`` in a fixed order (channels, user messages, receiver noise,
estimation noise). Permutations come from their own seeds, so two
configurations that differ only in permutation seeds see identical
channels, messages and noise.
"""

from __future__ import annotations

import logging
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass

import numpy as np

from .. import mimo
from ..codes import ParityCheckMatrix, Permutation, build_permutation
from ..optim import OPTIMAL
from ..receivers import dlmv_weights, joint_qp_decode, qp_weights
from ..rng import Xoshiro256
from .config import ConfigError, SimConfig
from .report import BerRecord

log = logging.getLogger(__name__)


@dataclass(frozen=True)
class SweepContext:
    """Per-sweep objects shared by all frames."""

    config: SimConfig
    code: ParityCheckMatrix
    perms: tuple[Permutation, ...]

    @classmethod
    def build(cls, cfg: SimConfig) -> "SweepContext":
        cfg.validate()
        try:
            code = cfg.code.build()
        except (ValueError, OSError) as exc:
            raise ConfigError([("code", str(exc))]) from exc
        if code.n % 2:
            raise ConfigError([("code", f"4-QAM framing needs an even length, got n={code.n}")])
        if code.dimension < 1:
            raise ConfigError([("code", "code has no information bits")])
        if cfg.covariance_snapshots != "frame" and cfg.covariance_snapshots > code.n // 2:
            raise ConfigError([("covariance_snapshots",
                                f"frame has only {code.n // 2} snapshots")])
        perms = tuple(build_permutation(s, code.n) for s in cfg.permutation_seeds)
        return cls(cfg, code, perms)


@dataclass
class FrameData:
    """One simulated frame: what was sent and what the receiver sees."""

    messages: list[np.ndarray]
    codewords: list[np.ndarray]
    snapshots: np.ndarray
    estimate: mimo.ChannelEstimate
    covariance: mimo.CovarianceEstimate
    noise_var: float


def generate_frame(ctx: SweepContext, snr_index: int, frame: int) -> FrameData:
    cfg = ctx.config
    enc = ctx.code.encoder
    rng = Xoshiro256.stream(cfg.seed, snr_index, frame)
    model = mimo.complex_to_real(mimo.draw_channels(cfg.antennas, cfg.gains, rng))
    messages = [rng.bits(enc.k) for _ in range(cfg.num_users)]
    codewords = [enc.encode(m) for m in messages]
    symbols = [mimo.map_bits_to_symbols(p.apply(c)) for p, c in zip(ctx.perms, codewords)]
    noise_var = mimo.noise_variance_for_snr(cfg.snr_db[snr_index], cfg.gains[0])
    Y = mimo.transmit_frame(model, symbols, noise_var, rng)
    est = mimo.contaminated_estimate(model.block(0), [model.block(u - 1) for u in cfg.contamination],
                                     cfg.estimation_noise_factor * noise_var, rng, cfg.contamination)
    Yc = Y if cfg.covariance_snapshots == "frame" else Y[:cfg.covariance_snapshots]
    cov = mimo.estimate_covariance(Yc, cfg.gamma_factor * noise_var)
    return FrameData(messages, codewords, Y, est, cov, noise_var)


def detect(ctx: SweepContext, data: FrameData, receiver: str) -> np.ndarray:
    """User 1's codeword estimate (unpermuted, hard bits) from one receiver."""
    cfg = ctx.config
    R, H = data.covariance.R_loaded, data.estimate.H_hat
    if receiver == "joint-qp":
        _, res = joint_qp_decode(R, H, cfg.alpha, data.snapshots, ctx.code, ctx.perms[0],
                                 cfg.formulation, settings=cfg.solver_settings(), gamma=data.covariance.gamma)
        if res.report.status != OPTIMAL:
            log.debug("joint QP finished with status %s", res.report.status)
        return res.bits
    if receiver == "dlmv":
        W = dlmv_weights(R, H, gamma=data.covariance.gamma)
    else:
        W = qp_weights(R, H, cfg.alpha, gamma=data.covariance.gamma)
    return ctx.perms[0].invert(mimo.slice_symbols(W.apply(data.snapshots)))


def frame_errors(ctx: SweepContext, snr_index: int, frame: int) -> np.ndarray:
    """Information-bit errors of user 1, one entry per configured receiver."""
    data = generate_frame(ctx, snr_index, frame)
    enc = ctx.code.encoder
    sent = data.messages[0]
    return np.array([int(np.count_nonzero(enc.extract(detect(ctx, data, r)) != sent))
                     for r in ctx.config.receivers], dtype=np.int64)


_WORKER_CTX: SweepContext | None = None


def _init_worker(cfg: SimConfig) -> None:
    global _WORKER_CTX
    _WORKER_CTX = SweepContext.build(cfg)


def _run_chunk(task: tuple[int, int, int]) -> tuple[int, np.ndarray]:
    snr_index, start, stop = task
    return snr_index, np.stack([frame_errors(_WORKER_CTX, snr_index, f) for f in range(start, stop)])


def _chunks(cfg: SimConfig, workers: int) -> list[tuple[int, int, int]]:
    size = max(1, -(-cfg.frames // (4 * workers)))
    return [(i, a, min(a + size, cfg.frames)) for i in range(len(cfg.snr_db)) for a in range(0, cfg.frames, size)]


def run_ber_sweep(cfg: SimConfig, workers: int = 1, progress=None) -> list[BerRecord]:
    """Simulate ``cfg.frames`` frames per SNR point for every receiver.

    ``workers > 1`` spreads frame chunks over processes; the totals are
    sums of integers, so they do not depend on scheduling. ``progress`` is
    called with ``(snr_index, frames_done)`` after each chunk.
    """
    ctx = SweepContext.build(cfg)
    nrx = len(cfg.receivers)
    bit_err = np.zeros((len(cfg.snr_db), nrx), dtype=np.int64)
    frm_err = np.zeros_like(bit_err)

    def collect(snr_index: int, errs: np.ndarray) -> None:
        bit_err[snr_index] += errs.sum(axis=0)
        frm_err[snr_index] += (errs > 0).sum(axis=0)
        if progress is not None:
            progress(snr_index, errs.shape[0])

    if workers <= 1:
        for i, a, b in _chunks(cfg, 1):
            collect(i, np.stack([frame_errors(ctx, i, f) for f in range(a, b)]))
    else:
        with ProcessPoolExecutor(max_workers=workers, initializer=_init_worker, initargs=(cfg,)) as pool:
            for i, errs in pool.map(_run_chunk, _chunks(cfg, workers)):
                collect(i, errs)

    k = ctx.code.dimension
    return [BerRecord(rx, float(snr), cfg.frames * k, int(bit_err[i, j]), cfg.frames, int(frm_err[i, j]))
            for j, rx in enumerate(cfg.receivers) for i, snr in enumerate(cfg.snr_db)]
