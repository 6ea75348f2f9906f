"""Receivers: DLMV and regularized beamformers, joint code-anchored QP, LP decoders."""

from .beamformers import (ReceiverWeights, dlmv_kkt_residual, dlmv_weights, qp_gradient,
                          qp_objective, qp_weights)
from .decoding import (DecodeResult, branch_costs_from_llr, lp_decode, lp_decode_trellis,
                       ml_decode_bruteforce, round_bits, viterbi_decode)
from .joint import joint_qp_decode, joint_qp_program

__all__ = [
    "DecodeResult", "ReceiverWeights", "branch_costs_from_llr", "dlmv_kkt_residual", "dlmv_weights",
    "joint_qp_decode", "joint_qp_program", "lp_decode", "lp_decode_trellis", "ml_decode_bruteforce",
    "qp_gradient", "qp_objective", "qp_weights", "round_bits", "viterbi_decode",
]
