import itertools

import numpy as np
import pytest
import scipy.sparse as sp

from coderx import mimo
from coderx.codes import build_conv_trellis, build_permutation, build_rm_code, conv_encode, regular_ldpc
from coderx.optim import QuadraticProgram, SolverSettings, solve_qp
from coderx.polytope import DegreeError, LinearConstraintSystem
from coderx.receivers import (branch_costs_from_llr, dlmv_kkt_residual, dlmv_weights,
                              joint_qp_decode, joint_qp_program, lp_decode, lp_decode_trellis,
                              ml_decode_bruteforce, qp_gradient, qp_objective, qp_weights, round_bits,
                              viterbi_decode)
from coderx.receivers.beamformers import E_TARGET
from coderx.rng import Xoshiro256

from .conftest import biawgn_llr


def random_instance(rng, Nr=4, T=40):
    Y = rng.standard_normal((T, 2 * Nr))
    R = Y.T @ Y / T + 0.1 * np.eye(2 * Nr)
    H = rng.standard_normal((2 * Nr, 2))
    return R, H


# ---------------------------------------------------------------- DLMV / regularized QP

def test_dlmv_projection_case():
    Q, _ = np.linalg.qr(np.random.default_rng(0).standard_normal((8, 2)))
    W = dlmv_weights(np.eye(8), Q).W
    assert np.allclose(W, Q, atol=1e-12)


def test_dlmv_against_dense_kkt():
    rng = np.random.default_rng(1)
    R, H = random_instance(rng)
    W = dlmv_weights(R, H).W
    n = R.shape[0]
    K = np.block([[2 * R, H], [H.T, np.zeros((2, 2))]])
    for k in range(2):
        rhs = np.concatenate([np.zeros(n), np.eye(2)[k]])
        w = np.linalg.solve(K, rhs)[:n]
        assert np.max(np.abs(W[:, k] - w)) <= 1e-8
    assert np.linalg.norm(W.T @ H - np.eye(2)) <= 1e-8
    assert dlmv_kkt_residual(R, H, W) <= 1e-6


def test_dlmv_scale_invariance_and_rank_error():
    R, H = random_instance(np.random.default_rng(2))
    W = dlmv_weights(R, H).W
    for c in (0.1, 10.0):
        assert np.max(np.abs(dlmv_weights(c * R, H).W - W)) <= 1e-9
    with pytest.raises(np.linalg.LinAlgError):
        dlmv_weights(R, np.column_stack([H[:, 0], 2 * H[:, 0]]))


def test_qp_weights_first_order_condition():
    R, H = random_instance(np.random.default_rng(3))
    w = qp_weights(R, H, 75.0).w
    assert np.linalg.norm(qp_gradient(R, H, 75.0, w)) <= 1e-8
    with pytest.raises(ValueError):
        qp_weights(R, H, 0.0)


def test_qp_weights_approach_dlmv_for_large_alpha():
    R, H = random_instance(np.random.default_rng(4))
    W = qp_weights(R, H, 1e8).W
    assert np.linalg.norm(W.T @ H - np.eye(2)) <= 1e-3
    assert np.allclose(W, dlmv_weights(R, H).W, atol=1e-4)


def test_qp_weights_match_numeric_solver():
    R, H = random_instance(np.random.default_rng(5))
    alpha = 75.0
    n = R.shape[0]
    s = LinearConstraintSystem()
    for i in range(2 * n):
        s.add_variable(f"w/{i}", "weight")
    Hb = sp.block_diag([H, H]).toarray()  # (I2 (x) H)
    P = 2 * (np.kron(np.eye(2), R) + alpha * Hb @ Hb.T)
    q = -2 * alpha * Hb @ E_TARGET
    rep = solve_qp(QuadraticProgram(P, q, s, offset=alpha * E_TARGET @ E_TARGET))
    w = qp_weights(R, H, alpha).w
    assert np.max(np.abs(rep.x - w)) <= 1e-6
    assert abs(rep.objective - qp_objective(R, H, alpha, w)) <= 1e-6


# ---------------------------------------------------------------- LP decoding

def test_round_bits_ties():
    assert round_bits([0.2, 0.5, 0.5 + 1e-10, 0.50001, 0.9]).tolist() == [0, 0, 0, 1, 1]


def test_lp_decode_all_positive_llr(hamming):
    res = lp_decode(hamming, np.ones(7))
    assert res.integral and not res.bits.any()


def test_lp_integral_outputs_are_ml(hamming):
    rng = np.random.default_rng(7)
    for _ in range(500 // 10):
        c = hamming.encoder.encode(rng.integers(0, 2, 4))
        llr = biawgn_llr(c, 2.0, 4 / 7, rng)
        res = lp_decode(hamming, llr)
        if res.integral:
            assert np.array_equal(res.bits, ml_decode_bruteforce(hamming, llr))


@pytest.mark.parametrize("other", ["fs", "decomposed"])
def test_formulations_agree_on_objective(hamming, other):
    rng = np.random.default_rng(9)
    for _ in range(10):
        llr = rng.normal(0.5, 1.5, 7)
        assert abs(lp_decode(hamming, llr, "exact").objective - lp_decode(hamming, llr, other).objective) <= 1e-6


def test_lp_decode_errors(hamming):
    with pytest.raises(ValueError):
        lp_decode(hamming, np.ones(6))
    H = regular_ldpc(256, 64, 3, seed=1)
    with pytest.raises(DegreeError):
        lp_decode(H, np.ones(256), "exact")


def test_ml_bruteforce_basics(hamming):
    assert not ml_decode_bruteforce(hamming, np.zeros(7)).any()
    c = hamming.encoder.encode([1, 0, 1, 1])
    assert np.array_equal(ml_decode_bruteforce(hamming, -2.0 * (2 * c.astype(float) - 1)), c)
    with pytest.raises(ValueError):
        ml_decode_bruteforce(regular_ldpc(96, 48, 3, seed=1), np.ones(96))


def test_ml_bruteforce_matches_exhaustive_vector_scan(hamming):
    D = hamming.to_dense().astype(int)
    words = [np.array(v) for v in itertools.product((0, 1), repeat=7) if not (D @ np.array(v) % 2).any()]
    rng = np.random.default_rng(10)
    for _ in range(50):
        llr = rng.standard_normal(7)
        best = min(words, key=lambda w: (float(w @ llr), tuple(w)))
        assert np.array_equal(ml_decode_bruteforce(hamming, llr), best)


# ---------------------------------------------------------------- trellis decoding

def test_viterbi_and_flow_on_noiseless_frame():
    t = build_conv_trellis("5,7", 10)
    bits = np.random.default_rng(11).integers(0, 2, 10)
    llr = 4.0 * (1 - 2 * conv_encode("5,7", bits).astype(float))
    costs = branch_costs_from_llr(t, llr)
    path, metric = viterbi_decode(t, costs)
    assert path == t.path_for_input(bits)
    assert metric == pytest.approx(sum(costs[e] for e in path))
    res = lp_decode_trellis(t, costs)
    assert res.integral and res.path == path
    assert np.array_equal(res.bits, bits)


def test_viterbi_matches_brute_force_on_short_frame():
    L = 8
    t = build_conv_trellis("5,7", L)
    rng = np.random.default_rng(12)
    for _ in range(5):
        costs = rng.standard_normal(len(t.edges))
        options = [t.path_for_input(b) for b in itertools.product((0, 1), repeat=L)]
        best = min(sum(costs[e] for e in p) for p in options)
        path, metric = viterbi_decode(t, costs)
        assert metric == pytest.approx(best, abs=1e-12)
        assert metric == pytest.approx(sum(costs[e] for e in path), abs=1e-12)


def test_flow_lp_with_equal_costs():
    t = build_conv_trellis("5,7", 6)
    res = lp_decode_trellis(t, np.full(len(t.edges), 0.7))
    assert res.objective == pytest.approx(t.num_sections * 0.7, abs=1e-6)
    with pytest.raises(ValueError):
        lp_decode_trellis(t, np.full(len(t.edges), np.inf))


# ---------------------------------------------------------------- joint QP

def _noiseless_single_user(code, perm, seed=0, Nr=8):
    rng = Xoshiro256(seed)
    model = mimo.complex_to_real(mimo.draw_channels(Nr, (1.0,), rng))
    c = code.encoder.encode(rng.bits(code.dimension))
    Y = mimo.transmit_frame(model, [mimo.map_bits_to_symbols(perm.apply(c))], 0.0)
    return model.block(0), c, Y


def test_joint_program_structure():
    code = build_rm_code(1, 3)[1]
    perm = build_permutation(3, 8)
    H1, c, Y = _noiseless_single_user(code, perm)
    qp = joint_qp_program(np.eye(16), H1, 75.0, Y, code, perm, "exact")
    s = qp.system
    assert not s.with_role("permuted-bit")
    assert len([r for r in s.equalities if r.tag.startswith("map/")]) == code.n
    row = next(r for r in s.equalities if r.tag == "map/R/0")
    assert s.index(f"f/c/{perm.mapping[0]}") in row.index.tolist()
    with pytest.raises(ValueError):
        joint_qp_program(np.eye(16), H1, 75.0, Y[:3], code, perm)


@pytest.mark.parametrize("formulation", ["exact", "fs", "decomposed"])
def test_joint_qp_noiseless_single_user(formulation):
    code = regular_ldpc(96, 48, 3, seed=1)
    perm = build_permutation(568, 96)
    H1, c, Y = _noiseless_single_user(code, perm, Nr=8)
    R = mimo.estimate_covariance(Y, 0.0).R_loaded
    W, res = joint_qp_decode(R, H1, 75.0, Y, code, perm, formulation)
    assert np.array_equal(res.bits, c)
    assert res.soft.min() >= -1e-6 and res.soft.max() <= 1 + 1e-6
    assert W.tag == "joint-qp" and W.alpha == 75.0


def test_joint_qp_objective_beats_reference_point():
    code = regular_ldpc(96, 48, 3, seed=1)
    perm = build_permutation(193, 96)
    H1, c, Y = _noiseless_single_user(code, perm, seed=4, Nr=8)
    R = mimo.estimate_covariance(Y, 1e-3).R_loaded
    alpha = 75.0
    W, res = joint_qp_decode(R, H1, alpha, Y, code, perm, "decomposed",
                             settings=SolverSettings(eps_abs=1e-8, eps_rel=1e-8))
    # reported objective is the receiver cost at the returned weights
    assert res.objective == pytest.approx(qp_objective(R, H1, alpha, W.w), abs=1e-6)
    candidates = [qp_weights(R, H1, alpha).W, dlmv_weights(R, H1).W]
    checked = 0
    for Wc in candidates:
        out = Y @ Wc
        expect = mimo.map_bits_to_symbols(perm.apply(c))
        if np.max(np.abs(out - expect)) <= 1e-6:
            checked += 1
            w = np.concatenate([Wc[:, 0], Wc[:, 1]])
            assert res.objective <= qp_objective(R, H1, alpha, w) + 1e-6
    assert checked >= 1
