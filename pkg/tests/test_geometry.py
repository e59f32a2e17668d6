import math

import numpy as np
import pytest

from holojcas.config import SPEED_OF_LIGHT, ConfigError, SystemConfig
from holojcas.geometry import (
    build_geometry,
    sensitivity_matrices,
    steering_bundle,
    steering_derivatives,
    steering_vector,
)
from holojcas.numerics import make_rng
from holojcas.validation import derivative_error, fd_steering, random_angles


@pytest.fixture
def cfg36():
    return SystemConfig(M=36, K=3)


def test_defaults_are_quarter_wavelength():
    cfg = SystemConfig()
    lam = SPEED_OF_LIGHT / 20e9
    assert cfg.d_x == pytest.approx(lam / 4)
    assert cfg.d_y == pytest.approx(lam / 4)
    assert cfg.k_f * cfg.d_x == pytest.approx(math.pi / 2)


def test_reference_wave_number():
    cfg = SystemConfig(n_s=math.sqrt(3), frequency=20e9)
    assert cfg.k_s == pytest.approx(2 * math.pi * math.sqrt(3) * 20e9 / 299792458.0, rel=1e-15)
    assert cfg.k_s == pytest.approx(726.022, abs=1e-3)


@pytest.mark.parametrize(
    "kwargs,needle",
    [
        ({"M": 35}, "perfect square"),
        ({"M": 1}, "perfect square"),
        ({"K": 0}, "K must"),
        ({"M": 4, "K": 5}, "K must"),
        ({"d_x": 0.01}, "d_x"),
        ({"d_y": -1e-3}, "d_y"),
        ({"P_total": 0.0}, "P_total"),
        ({"sigma_r2": 0.0}, "sigma_r2"),
        ({"beta": -1.0}, "beta"),
        ({"gamma": 0.0}, "gamma"),
        ({"eta": 0.0}, "eta"),
    ],
)
def test_config_invariants(kwargs, needle):
    with pytest.raises(ConfigError, match=needle):
        SystemConfig(**kwargs)


def test_snr_sets_both_noise_variances():
    cfg = SystemConfig().with_snr_db(10.0)
    assert cfg.sigma_n2 == pytest.approx(0.1)
    assert cfg.sigma_r2 == cfg.sigma_n2
    assert cfg.snr_db == pytest.approx(10.0)


def test_element_grid_layout(cfg36):
    geo = build_geometry(cfg36)
    n = cfg36.side
    for m in (0, 1, 5, 6, 17, 35):
        m_y, m_x = divmod(m, n)
        np.testing.assert_allclose(geo.element_positions[m], [m_x * cfg36.d_x, m_y * cfg36.d_y, 0.0])


def test_phase_matrix_unit_modulus(cfg36):
    geo = build_geometry(cfg36)
    assert geo.Phi.shape == (36, 3)
    np.testing.assert_allclose(np.abs(geo.Phi), 1.0, rtol=0, atol=1e-15)


def test_two_by_two_single_feed_distances():
    cfg = SystemConfig(M=4, K=1)
    d = cfg.d_x
    geo = build_geometry(cfg)
    np.testing.assert_allclose(geo.feed_positions[0], [d / 2, 0, 0])
    # elements (0,0), (d,0), (0,d), (d,d); feed at (d/2, 0)
    expected = np.array([d / 2, d / 2, d * math.sqrt(5) / 2, d * math.sqrt(5) / 2])
    np.testing.assert_allclose(geo.distances()[:, 0], expected, rtol=1e-14)
    np.testing.assert_allclose(geo.Phi[:, 0], np.exp(-1j * cfg.k_s * expected), rtol=1e-13)


def test_feeds_spread_along_edge():
    cfg = SystemConfig(M=36, K=3)
    L = 5 * cfg.d_x
    np.testing.assert_allclose(build_geometry(cfg).feed_positions[:, 0], [L / 6, L / 2, 5 * L / 6])


def test_phase_matrix_independent_of_target(cfg36):
    other = cfg36.replace(theta_t=0.3, phi_t=2.0)
    assert build_geometry(cfg36).Phi.tobytes() == build_geometry(other).Phi.tobytes()


def test_steering_boresight_all_ones(cfg36):
    for phi in (0.0, 0.7, 3.0):
        np.testing.assert_array_equal(steering_vector(0.0, phi, cfg36), np.ones(36, dtype=complex))


def test_steering_two_by_two_endfire():
    cfg = SystemConfig(M=4)
    a = steering_vector(math.pi / 2, 0.0, cfg)
    np.testing.assert_allclose(a, [1, 1j, 1, 1j], atol=1e-15)


def test_steering_unit_modulus_and_kron_index(cfg36):
    rng = make_rng(2)
    n = cfg36.side
    for theta, phi in random_angles(rng, 10):
        a = steering_vector(theta, phi, cfg36)
        np.testing.assert_allclose(np.abs(a), 1.0, atol=1e-14)
        st, ct = math.sin(theta), math.cos(theta)
        a_x = np.exp(1j * np.arange(n) * cfg36.k_f * cfg36.d_x * st * math.cos(phi))
        a_y = np.exp(1j * np.arange(n) * cfg36.k_f * cfg36.d_y * st * math.sin(phi))
        for m_y in range(n):
            for m_x in range(n):
                assert a[m_y * n + m_x] == pytest.approx(a_y[m_y] * a_x[m_x], rel=1e-13)


def test_derivatives_at_boresight(cfg36):
    d_t, d_p = steering_derivatives(0.0, 0.0, cfg36)
    m_x = np.arange(36) % 6
    np.testing.assert_allclose(d_t, 1j * cfg36.k_f * cfg36.d_x * m_x, atol=1e-15)
    np.testing.assert_array_equal(d_p, np.zeros(36))


def test_theta_derivative_vanishes_at_ninety_degrees(cfg36):
    for phi in (0.0, 0.4, 2.5):
        d_t, _ = steering_derivatives(math.pi / 2, phi, cfg36)
        assert np.linalg.norm(d_t) == 0.0


@pytest.mark.parametrize("M", [4, 36, 100])
def test_derivatives_match_finite_differences(M):
    cfg = SystemConfig(M=M)
    for theta, phi in random_angles(make_rng(7, M), 20):
        assert derivative_error(theta, phi, cfg) < 1e-6


def test_derivatives_wrong_kron_order_is_caught():
    # the alternative ordering d(a_x) (x) a_y does not differentiate a = a_y (x) a_x
    cfg = SystemConfig(M=36, d_y=SystemConfig().d_y * 0.7)
    theta, phi = 0.6, 1.1
    num_t, _ = fd_steering(theta, phi, cfg)
    d_t, _ = steering_derivatives(theta, phi, cfg)
    n = cfg.side
    swapped = d_t.reshape(n, n).T.ravel()
    assert np.linalg.norm(swapped - num_t) / np.linalg.norm(num_t) > 1e-2


def test_sensitivity_matrices_hermitian_and_rank_two(cfg36):
    for theta, phi in random_angles(make_rng(9), 10):
        A_t, A_p = sensitivity_matrices(theta, phi, cfg36)
        for A in (A_t, A_p):
            assert np.max(np.abs(A - A.conj().T)) <= 1e-12
            s = np.linalg.svd(A, compute_uv=False)
            assert s[2] < 1e-9 * s[0]


def test_sensitivity_zero_at_ninety_degrees(cfg36):
    A_t, _ = sensitivity_matrices(math.pi / 2, 0.3, cfg36)
    assert np.max(np.abs(A_t)) == 0.0


def test_bundle_consistency(cfg36):
    b = steering_bundle(cfg36)
    np.testing.assert_allclose(b.a, steering_vector(cfg36.theta_t, cfg36.phi_t, cfg36))
    np.testing.assert_allclose(b.gram_theta, b.A_theta @ b.A_theta.conj().T, atol=1e-9)
    assert np.all(np.abs(b.a) == pytest.approx(1.0))
