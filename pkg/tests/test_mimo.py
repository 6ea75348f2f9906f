import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from coderx import mimo
from coderx.rng import Xoshiro256

INV = 1 / np.sqrt(2)


def test_real_block_structure():
    assert np.array_equal(mimo.real_block(np.array([1.0 + 0j])), np.eye(2))
    assert np.array_equal(mimo.real_block(np.array([1j])), np.array([[0.0, -1.0], [1.0, 0.0]]))


def test_complex_to_real_matches_complex_product():
    rng = np.random.default_rng(0)
    h = rng.standard_normal((3, 4)) + 1j * rng.standard_normal((3, 4))
    model = mimo.complex_to_real(mimo.ComplexChannel(h, (1.0, 1.0, 1.0)))
    assert model.H.shape == (8, 6)
    x = rng.standard_normal(3) + 1j * rng.standard_normal(3)
    y = h.T @ x
    xr = np.concatenate([[xk.real, xk.imag] for xk in x])
    assert np.max(np.abs(model.H @ xr - mimo.real_vector(y))) <= 1e-12
    for k in range(3):
        B = model.block(k)
        a, b = h[k].real, h[k].imag
        assert np.array_equal(B, np.block([[a[:, None], -b[:, None]], [b[:, None], a[:, None]]]))


def test_draw_channels_power_and_determinism():
    g = (1.0, 0.3, 0.7)
    ms = np.zeros(3)
    rng = Xoshiro256(5)
    draws = 10_000 // 32 + 1
    for _ in range(draws):
        ch = mimo.draw_channels(32, g, rng)
        ms += np.mean(np.abs(ch.h) ** 2, axis=1)
    ms /= draws
    assert np.all(np.abs(ms / np.array(g) - 1) < 0.05)
    a = mimo.draw_channels(4, g, Xoshiro256(1)).h
    b = mimo.draw_channels(4, g, Xoshiro256(1)).h
    assert np.array_equal(a, b)
    with pytest.raises(ValueError):
        mimo.draw_channels(4, (1.0, 0.0), Xoshiro256(1))


def test_contaminated_estimate():
    rng = np.random.default_rng(1)
    H1, H2 = rng.standard_normal((8, 2)), rng.standard_normal((8, 2))
    assert np.array_equal(mimo.contaminated_estimate(H1, [], 0.0).H_hat, H1)
    est = mimo.contaminated_estimate(H1, [H2], 0.0, indices=[2])
    assert np.array_equal(est.H_hat, H1 + H2) and est.contaminators == (2,)
    with pytest.raises(ValueError):
        mimo.contaminated_estimate(H1, [np.zeros((4, 2))], 0.0)


def test_estimation_noise_variance():
    Nr, v = 16, 0.3
    H1 = np.zeros((2 * Nr, 2))
    rng = Xoshiro256(3)
    err = [np.sum(mimo.contaminated_estimate(H1, [], v, rng).H_hat ** 2) for _ in range(2000)]
    assert abs(np.mean(err) / (4 * Nr * v) - 1) < 0.02


def test_qam_mapping():
    assert np.allclose(mimo.map_bits_to_symbols([0, 0]), [[-INV, INV]])
    assert np.allclose(mimo.map_bits_to_symbols([1, 1]), [[INV, -INV]])
    for bits in ([0, 0], [0, 1], [1, 0], [1, 1]):
        assert mimo.slice_symbols(mimo.map_bits_to_symbols(bits)).tolist() == bits
    with pytest.raises(ValueError):
        mimo.map_bits_to_symbols([0, 1, 1])


@given(st.lists(st.integers(0, 1), min_size=1, max_size=40).map(lambda b: b + b[:1] if len(b) % 2 else b))
def test_qam_round_trip_and_unit_energy(bits):
    s = mimo.map_bits_to_symbols(bits)
    assert mimo.slice_symbols(s).tolist() == bits
    assert np.allclose(np.sum(s ** 2, axis=1), 1.0)


def test_transmit_frame_noiseless_cases():
    s = mimo.map_bits_to_symbols([0, 1, 1, 0])
    model = mimo.RealChannelModel(np.eye(2))
    assert np.array_equal(mimo.transmit_frame(model, [s], 0.0), s)
    rng = np.random.default_rng(2)
    H = rng.standard_normal((6, 4))
    m2 = mimo.RealChannelModel(H)
    s1, s2 = rng.standard_normal((5, 2)), rng.standard_normal((5, 2))
    Y = mimo.transmit_frame(m2, [s1, s2], 0.0)
    assert np.allclose(Y, s1 @ H[:, :2].T + s2 @ H[:, 2:].T)
    with pytest.raises(ValueError):
        mimo.transmit_frame(m2, [s1, s2[:4]], 0.0)
    with pytest.raises(ValueError):
        mimo.transmit_frame(m2, [s1], 0.0)


def test_empirical_snr_matches_configuration():
    # target-user signal power over noise power, both per receive antenna, averaged over 400 channel draws
    snr_db, Nr, T = 12.0, 8, 250
    rng = Xoshiro256(9)
    sig, noise = 0.0, 0.0
    for _ in range(400):
        ch = mimo.draw_channels(Nr, (1.0,), rng)
        model = mimo.complex_to_real(ch)
        bits = rng.bits(2 * T)
        s = mimo.map_bits_to_symbols(bits)
        nv = mimo.noise_variance_for_snr(snr_db, 1.0)
        clean = mimo.transmit_frame(model, [s], 0.0)
        Y = mimo.transmit_frame(model, [s], nv, rng)
        sig += np.sum(clean ** 2)
        noise += np.sum((Y - clean) ** 2)
    assert abs(10 * np.log10(sig / noise) - snr_db) < 0.2


def test_covariance_estimate():
    y = np.array([[1.0, 2.0, -1.0]])
    cov = mimo.estimate_covariance(y, 0.5)
    assert np.allclose(cov.R_hat, np.outer(y[0], y[0]))
    ev = np.linalg.eigvalsh(cov.R_hat)
    assert np.allclose(np.linalg.eigvalsh(cov.R_loaded), ev + 0.5)
    with pytest.raises(ValueError):
        mimo.estimate_covariance(np.zeros((0, 3)))
    with pytest.raises(ValueError):
        mimo.estimate_covariance(y, -1.0)


def test_covariance_law_of_large_numbers():
    Y = Xoshiro256(4).normals((10_000, 6))
    cov = mimo.estimate_covariance(Y)
    assert np.linalg.norm(cov.R_hat - np.eye(6)) / np.linalg.norm(np.eye(6)) <= 0.1
    assert np.allclose(cov.R_hat, cov.R_hat.T)
    assert np.linalg.eigvalsh(cov.R_hat).min() >= 0


def test_received_power_reflects_gains():
    g = (1.0, 0.3, 0.7)
    rng = Xoshiro256(21)
    power = np.zeros(3)
    for _ in range(40):
        model = mimo.complex_to_real(mimo.draw_channels(32, g, rng))
        for k in range(3):
            s = mimo.map_bits_to_symbols(rng.bits(2 * 256))
            power[k] += np.mean(np.sum((s @ model.block(k).T) ** 2, axis=1)) / 32
    power /= 40
    assert np.all(np.abs(power / np.array(g) - 1) < 0.05)
