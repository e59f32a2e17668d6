"""Self-check suite: independent oracles for the analytic derivations.

Every check returns ``(passed, detail)``. Module attributes are looked up at
call time, so a patched implementation is what gets checked.
"""

from __future__ import annotations

import time
from typing import Callable

import numpy as np

from . import comms, geometry, optimizer, sensing
from .config import SystemConfig
from .numerics import make_rng

FD_STEP = 1e-6
VALIDATE_SEED = 20240501


def _rel(a, b) -> float:
    a = np.asarray(a)
    b = np.asarray(b)
    denom = np.linalg.norm(b)
    return float(np.linalg.norm(a - b) / denom) if denom > 0 else float(np.linalg.norm(a - b))


def fd_steering(theta: float, phi: float, config: SystemConfig, step: float = FD_STEP):
    """Central differences of the steering vector in theta and phi."""
    sv = geometry.steering_vector
    d_t = (sv(theta + step, phi, config) - sv(theta - step, phi, config)) / (2 * step)
    d_p = (sv(theta, phi + step, config) - sv(theta, phi - step, config)) / (2 * step)
    return d_t, d_p


def derivative_error(theta: float, phi: float, config: SystemConfig) -> float:
    """Worst relative error of the analytic derivatives against central differences.

    Zero analytic derivatives are compared in absolute terms (scaled so that
    the 1e-6 threshold maps onto an absolute 1e-9 bound).
    """
    analytic = geometry.steering_derivatives(theta, phi, config)
    numeric = fd_steering(theta, phi, config)
    worst = 0.0
    for an, nu in zip(analytic, numeric):
        scale = np.linalg.norm(an)
        if scale == 0:
            worst = max(worst, np.linalg.norm(nu) * 1e-6 / 1e-9)
        else:
            worst = max(worst, np.linalg.norm(an - nu) / scale)
    return float(worst)


def random_angles(rng: np.random.Generator, n: int) -> np.ndarray:
    return np.column_stack([rng.uniform(0.05, np.pi / 2 - 0.05, n), rng.uniform(0.05, 2 * np.pi - 0.05, n)])


def random_instance(config: SystemConfig, rng: np.random.Generator):
    """Random (h, w, v) for the given configuration."""
    h = comms.rayleigh_channel(config.M, rng)
    w = rng.uniform(0.0, 1.0, config.M)
    v = rng.standard_normal(config.K) + 1j * rng.standard_normal(config.K)
    return h, w, v


def numeric_fim(config: SystemConfig, W, v, step: float = FD_STEP) -> np.ndarray:
    """FIM from central differences of the noiseless echo mean ``gamma a a^H W v``."""
    x = W @ v

    def mean(theta, phi):
        a = geometry.steering_vector(theta, phi, config)
        return config.gamma * a * np.vdot(a, x)

    t, p = config.theta_t, config.phi_t
    d_t = (mean(t + step, p) - mean(t - step, p)) / (2 * step)
    d_p = (mean(t, p + step) - mean(t, p - step)) / (2 * step)
    D = np.column_stack([d_t, d_p])
    return (2 / config.sigma_r2) * np.real(D.conj().T @ D)


def check_derivatives(n: int = 20, M: int = 100) -> tuple[bool, str]:
    config = SystemConfig(M=M)
    worst = max(derivative_error(t, p, config) for t, p in random_angles(make_rng(VALIDATE_SEED, 1), n))
    return worst < 1e-6, f"max rel err {worst:.2e} over {n} angle pairs (M={M})"


def check_fim(n: int = 10, M: int = 16) -> tuple[bool, str]:
    rng = make_rng(VALIDATE_SEED, 2)
    worst = 0.0
    for t, p in random_angles(rng, n):
        config = SystemConfig(M=M, K=3, theta_t=float(t), phi_t=float(p))
        bundle = geometry.steering_bundle(config)
        Phi = geometry.build_geometry(config).Phi
        _, w, v = random_instance(config, rng)
        W = optimizer.holographic_matrix(w, Phi)
        F = sensing.fim_2x2(bundle, W, v, config.gamma, config.sigma_r2)
        worst = max(worst, _rel(F, numeric_fim(config, W, v)))
    return worst < 1e-5, f"max rel err {worst:.2e} over {n} instances (M={M})"


def check_quadratic_forms(n: int = 100) -> tuple[bool, str]:
    rng = make_rng(VALIDATE_SEED, 3)
    worst = 0.0
    for t, p in random_angles(rng, n):
        config = SystemConfig(M=16, K=3, theta_t=float(t), phi_t=float(p))
        bundle = geometry.steering_bundle(config)
        Phi = geometry.build_geometry(config).Phi
        h, w, v = random_instance(config, rng)
        Q_c, Q_t, Q_p = optimizer.build_quadratic_forms(Phi, v, h, bundle)
        W = optimizer.holographic_matrix(w, Phi)
        q_t, q_p = sensing.quadratic_forms(bundle, W, v)
        worst = max(
            worst,
            abs((w @ Q_c @ w).real - comms.received_power(h, W, v)) / comms.received_power(h, W, v),
            abs((w @ Q_t @ w).real - q_t) / q_t,
            abs((w @ Q_p @ w).real - q_p) / q_p,
        )
    return worst < 1e-10, f"max rel err {worst:.2e} over {n} draws"


def check_tangent_bound(n: int = 100) -> tuple[bool, str]:
    grid = np.logspace(-6, 6, n)
    violations = 0
    for x0 in grid:
        for x in grid:
            s = optimizer.surrogate_inv_quadratic(float(x), float(x0))
            if x == x0:
                violations += abs(s - 1 / x) > 1e-15 * (1 / x)
            else:
                violations += not s < 1 / x
    return violations == 0, f"{violations} violations on {n}x{n} grid"


def check_surrogate_tangency(n: int = 20) -> tuple[bool, str]:
    """The digital surrogate, built from the majorization matrix, touches the objective at v_t."""
    rng = make_rng(VALIDATE_SEED, 4)
    config = SystemConfig(M=16, K=3)
    bundle = geometry.steering_bundle(config)
    Phi = geometry.build_geometry(config).Phi
    c = config.beta * config.crb_scale
    worst = 0.0
    for _ in range(n):
        h, w, v = random_instance(config, rng)
        M_t = optimizer.digital_majorizer(h, Phi, w, bundle, v, config)
        W = optimizer.holographic_matrix(w, Phi)
        q_t, q_p = (float(np.vdot(v, W.conj().T @ g @ W @ v).real) for g in (bundle.gram_theta, bundle.gram_phi))
        surrogate = float(np.vdot(v, M_t @ v).real) - c * (2 / q_t + 2 / q_p)
        state = optimizer.BeamformerState(w=w, v_d=v, Phi=Phi)
        true = optimizer.evaluate_objective(state, h, bundle, config).weighted_objective
        worst = max(worst, abs(surrogate - true) / abs(true))
    return worst < 1e-12, f"max rel err {worst:.2e}"


def check_power(M: int = 36, K: int = 3, trials: int = 3) -> tuple[bool, str]:
    from .harness import draw_channel

    config = SystemConfig(M=M, K=K)
    geo = geometry.build_geometry(config)
    bundle = geometry.steering_bundle(config)
    worst_p, box_ok = 0.0, True

    def on_digital(W, v):
        nonlocal worst_p
        worst_p = max(worst_p, abs(comms.tx_power(W, v) - config.P_total) / config.P_total)

    def on_pga(k, w, f):
        nonlocal box_ok
        box_ok = box_ok and bool(np.all((w >= 0) & (w <= 1)))

    for i in range(trials):
        state, _ = optimizer.optimize(config, draw_channel(config, i), geo, bundle, on_digital=on_digital, on_pga=on_pga)
        worst_p = max(worst_p, abs(comms.tx_power(state.W, state.v_d) - config.P_total) / config.P_total)
    return worst_p < 1e-9 and box_ok, f"max power rel err {worst_p:.2e}, box ok: {box_ok}"


CHECKS: dict[str, Callable[[], tuple[bool, str]]] = {
    "steering-derivatives-fd": check_derivatives,
    "fim-vs-numeric": check_fim,
    "quadratic-form-identities": check_quadratic_forms,
    "tangent-bound": check_tangent_bound,
    "surrogate-tangency": check_surrogate_tangency,
    "power-and-box-constraints": check_power,
}


def run_all(echo: Callable[[str], None] = print) -> bool:
    ok = True
    for name, check in CHECKS.items():
        t0 = time.perf_counter()
        try:
            passed, detail = check()
        except Exception as exc:  # a crashing check is a failed check
            passed, detail = False, f"error: {exc!r}"
        ok = ok and passed
        echo(f"[{'PASS' if passed else 'FAIL'}] {name}: {detail} ({time.perf_counter() - t0:.2f}s)")
    return ok
