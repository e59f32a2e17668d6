"""Fisher information and Cramér-Rao bounds for the target angles (theta, phi)."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .geometry import SteeringBundle

UNOBSERVABLE_FLOOR = 1e-30
ANGLES = ("theta", "phi")


class UnobservableAngleError(ValueError):
    def __init__(self, angle: str, value: float):
        super().__init__(f"angle {angle} is unobservable: quadratic form {value:.3e}")
        self.angle = angle
        self.value = value


@dataclass(frozen=True)
class FimReport:
    fim: np.ndarray
    crb_theta_diag: float
    crb_phi_diag: float
    crb_theta_full: float
    crb_phi_full: float


def _check_dims(bundle: SteeringBundle, W: np.ndarray, v: np.ndarray) -> None:
    M = bundle.a.shape[0]
    if W.ndim != 2 or W.shape[0] != M or v.ndim != 1 or W.shape[1] != v.shape[0]:
        raise ValueError(f"dimension mismatch: a has {M} entries, W is {W.shape}, v is {v.shape}")


def sensitivity_signals(bundle: SteeringBundle, W, v) -> tuple[np.ndarray, np.ndarray]:
    """``(A_theta W v, A_phi W v)``; the mean derivatives up to the factor gamma."""
    W = np.asarray(W, dtype=complex)
    v = np.asarray(v, dtype=complex)
    _check_dims(bundle, W, v)
    x = W @ v
    return bundle.A_theta @ x, bundle.A_phi @ x


def fim_2x2(bundle: SteeringBundle, W, v, gamma: complex, sigma_r2: float) -> np.ndarray:
    if not sigma_r2 > 0:
        raise ValueError("sigma_r2 must be positive")
    g = np.column_stack(sensitivity_signals(bundle, W, v))
    F = (2 * abs(gamma) ** 2 / sigma_r2) * np.real(g.conj().T @ g)
    return 0.5 * (F + F.T)


def quadratic_forms(bundle: SteeringBundle, W, v) -> tuple[float, float]:
    """``v^H W^H A A^H W v`` for theta and phi."""
    s_t, s_p = sensitivity_signals(bundle, W, v)
    return float(np.vdot(s_t, s_t).real), float(np.vdot(s_p, s_p).real)


def crb(bundle: SteeringBundle, W, v, gamma: complex, sigma_r2: float) -> FimReport:
    """Per-angle CRBs, both as ``1/F_ii`` and as the diagonal of ``F^-1``.

    Raises UnobservableAngleError when either quadratic form vanishes. A
    singular 2x2 FIM leaves the full-form bounds at ``inf``.
    """
    F = fim_2x2(bundle, W, v, gamma, sigma_r2)
    scale = sigma_r2 / (2 * abs(gamma) ** 2)
    qf = quadratic_forms(bundle, W, v)
    for name, q in zip(ANGLES, qf):
        if not q > UNOBSERVABLE_FLOOR:
            raise UnobservableAngleError(name, q)
    crb_t, crb_p = scale / qf[0], scale / qf[1]

    det = F[0, 0] * F[1, 1] - F[0, 1] * F[1, 0]
    if det > 1e-14 * F[0, 0] * F[1, 1]:
        full_t, full_p = F[1, 1] / det, F[0, 0] / det
    else:
        full_t = full_p = float("inf")
    return FimReport(
        fim=F,
        crb_theta_diag=crb_t,
        crb_phi_diag=crb_p,
        crb_theta_full=float(full_t),
        crb_phi_full=float(full_p),
    )
