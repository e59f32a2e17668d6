"""RHS layout, reference-wave phases and planar-array steering vectors.

Element ``m = m_y * sqrt(M) + m_x`` sits at ``(m_x d_x, m_y d_y, 0)``, which
matches the Kronecker ordering ``a = a_y (x) a_x`` of the steering vector.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property

import numpy as np

from .config import SystemConfig
from .numerics import kron


@dataclass(frozen=True)
class ArrayGeometry:
    element_positions: np.ndarray  # (M, 3) meters
    feed_positions: np.ndarray  # (K, 3) meters
    phase_matrix: np.ndarray  # (M, K) unit modulus

    @property
    def Phi(self) -> np.ndarray:
        return self.phase_matrix

    def distances(self) -> np.ndarray:
        """(M, K) feed-to-element Euclidean distances."""
        diff = self.element_positions[:, None, :] - self.feed_positions[None, :, :]
        return np.linalg.norm(diff, axis=-1)


@dataclass(frozen=True)
class SteeringBundle:
    a: np.ndarray
    da_dtheta: np.ndarray
    da_dphi: np.ndarray
    A_theta: np.ndarray
    A_phi: np.ndarray

    @cached_property
    def gram_theta(self) -> np.ndarray:
        """A_theta A_theta^H (equal to A_theta @ A_theta since A_theta is Hermitian)."""
        return self.A_theta @ self.A_theta

    @cached_property
    def gram_phi(self) -> np.ndarray:
        return self.A_phi @ self.A_phi


def element_positions(config: SystemConfig) -> np.ndarray:
    n = config.side
    m_y, m_x = np.divmod(np.arange(config.M), n)
    return np.column_stack([m_x * config.d_x, m_y * config.d_y, np.zeros(config.M)])


def feed_positions(config: SystemConfig) -> np.ndarray:
    """K feeds spread uniformly along the y = 0 edge of the aperture."""
    length = (config.side - 1) * config.d_x
    x = (np.arange(config.K) + 0.5) * length / config.K
    return np.column_stack([x, np.zeros(config.K), np.zeros(config.K)])


def build_geometry(config: SystemConfig) -> ArrayGeometry:
    config.validate()
    elems = element_positions(config)
    feeds = feed_positions(config)
    r = np.linalg.norm(elems[:, None, :] - feeds[None, :, :], axis=-1)
    phi = np.exp(-1j * config.k_s * r)
    return ArrayGeometry(element_positions=elems, feed_positions=feeds, phase_matrix=phi)


def _sincos(x: float) -> tuple[float, float]:
    """sin and cos with exact zeros at multiples of pi/2."""
    s, c = float(np.sin(x)), float(np.cos(x))
    return (0.0 if abs(s) < 1e-15 else s), (0.0 if abs(c) < 1e-15 else c)


def _axis_terms(theta: float, phi: float, config: SystemConfig):
    n = np.arange(config.side)
    kx = config.k_f * config.d_x
    ky = config.k_f * config.d_y
    st, ct = _sincos(theta)
    sp, cp = _sincos(phi)
    a_x = np.exp(1j * n * kx * st * cp)
    a_y = np.exp(1j * n * ky * st * sp)
    return n, kx, ky, a_x, a_y, (st, ct, sp, cp)


def steering_vector(theta: float, phi: float, config: SystemConfig) -> np.ndarray:
    _, _, _, a_x, a_y, _ = _axis_terms(theta, phi, config)
    return kron(a_y, a_x)


def steering_derivatives(theta: float, phi: float, config: SystemConfig) -> tuple[np.ndarray, np.ndarray]:
    """Analytic ``(da/dtheta, da/dphi)`` for ``a = a_y (x) a_x``."""
    n, kx, ky, a_x, a_y, (st, ct, sp, cp) = _axis_terms(theta, phi, config)
    ramp_x = n * a_x
    ramp_y = n * a_y

    dax_dt = 1j * kx * ct * cp * ramp_x
    day_dt = 1j * ky * ct * sp * ramp_y
    dax_dp = -1j * kx * st * sp * ramp_x
    day_dp = 1j * ky * st * cp * ramp_y

    da_dtheta = kron(day_dt, a_x) + kron(a_y, dax_dt)
    da_dphi = kron(day_dp, a_x) + kron(a_y, dax_dp)
    return da_dtheta, da_dphi


def _sym_outer(d: np.ndarray, a: np.ndarray) -> np.ndarray:
    X = np.outer(d, a.conj())
    return X + X.conj().T


def sensitivity_matrices(theta: float, phi: float, config: SystemConfig) -> tuple[np.ndarray, np.ndarray]:
    a = steering_vector(theta, phi, config)
    d_t, d_p = steering_derivatives(theta, phi, config)
    return _sym_outer(d_t, a), _sym_outer(d_p, a)


def steering_bundle(config: SystemConfig, theta: float | None = None, phi: float | None = None) -> SteeringBundle:
    theta = config.theta_t if theta is None else theta
    phi = config.phi_t if phi is None else phi
    a = steering_vector(theta, phi, config)
    d_t, d_p = steering_derivatives(theta, phi, config)
    return SteeringBundle(a=a, da_dtheta=d_t, da_dphi=d_p, A_theta=_sym_outer(d_t, a), A_phi=_sym_outer(d_p, a))
