"""MM-based alternating optimization of the digital and holographic beamformers.

Each outer iteration
  1. builds the digital majorization matrix from the current state and takes
     its top eigenvector, scaled to the power budget;
  2. rewrites the objective as quadratic forms in the real weights ``w`` and
     runs projected gradient ascent on the resulting majorizer;
  3. rescales ``v_d`` so the hybrid beamformer meets the power budget again.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from . import comms, sensing
from .config import SystemConfig
from .geometry import ArrayGeometry, SteeringBundle, steering_bundle
from .numerics import hermitian_top_eig

EXPANSION_FLOOR = 1e-30
NULL_SPACE_FLOOR = 1e-14

TOLERANCE_MET = "tolerance-met"
ITERATION_CAP = "iteration-cap"


class DegenerateExpansionError(ValueError):
    """The surrogate expansion point has a vanishing quadratic form."""


class NullSpaceEigenvectorError(ValueError):
    pass


class OptimizationError(RuntimeError):
    def __init__(self, iteration: int, cause: Exception):
        super().__init__(f"outer iteration {iteration}: {cause}")
        self.iteration = iteration
        self.cause = cause


@dataclass
class BeamformerState:
    w: np.ndarray
    v_d: np.ndarray
    Phi: np.ndarray

    @property
    def W(self) -> np.ndarray:
        return self.w[:, None] * self.Phi

    def copy(self) -> "BeamformerState":
        return BeamformerState(self.w.copy(), self.v_d.copy(), self.Phi)


@dataclass(frozen=True)
class ObjectiveBreakdown:
    comm_term: float
    crb_theta: float
    crb_phi: float
    weighted_objective: float
    rate: float
    tx_power: float


@dataclass
class ConvergenceTrace:
    records: list[ObjectiveBreakdown] = field(default_factory=list)
    termination: str = ITERATION_CAP
    inner_iterations: list[int] = field(default_factory=list)

    @property
    def iterations(self) -> int:
        return len(self.records)

    @property
    def converged(self) -> bool:
        return self.termination == TOLERANCE_MET


def holographic_matrix(w, Phi) -> np.ndarray:
    """W = diag(w) Phi."""
    return np.asarray(w, dtype=float)[:, None] * Phi


def surrogate_inv_quadratic(x: float, x0: float) -> float:
    """Tangent line of 1/x at x0, evaluated at x: 2/x0 - x/x0^2.

    1/x is convex, so this tangent never exceeds 1/x and touches it at x = x0.
    """
    if not (x > 0 and x0 > 0):
        raise ValueError(f"surrogate needs positive arguments (x={x}, x0={x0})")
    return 2.0 / x0 - x / (x0 * x0)


def _crb_weight(config: SystemConfig) -> float:
    return config.beta * config.crb_scale


def digital_majorizer(h, Phi, w, bundle: SteeringBundle, v_t, config: SystemConfig) -> np.ndarray:
    W = holographic_matrix(w, Phi)
    g = W.conj().T @ np.asarray(h, dtype=complex)
    M_t = config.alpha * np.outer(g, g.conj())
    c = _crb_weight(config)
    if c == 0:
        return M_t
    for name, gram in (("theta", bundle.gram_theta), ("phi", bundle.gram_phi)):
        B = W.conj().T @ gram @ W
        q = float(np.vdot(v_t, B @ v_t).real)
        if not q > EXPANSION_FLOOR:
            raise DegenerateExpansionError(f"degenerate expansion point: v^H B_{name} v = {q:.3e}")
        M_t = M_t + (c / q**2) * B
    return 0.5 * (M_t + M_t.conj().T)


def scale_to_power(v, W, P_total: float) -> np.ndarray:
    norm = np.linalg.norm(W @ v)
    if norm < NULL_SPACE_FLOOR:
        raise NullSpaceEigenvectorError(f"W v has norm {norm:.3e}; cannot meet the power budget")
    return np.sqrt(P_total) * v / norm


def update_digital(M_t, W, P_total: float) -> np.ndarray:
    """Top eigenvector of ``M_t`` scaled so that ``||W v||^2 = P_total``."""
    _, e = hermitian_top_eig(M_t)
    return scale_to_power(e, W, P_total)


def build_quadratic_forms(Phi, v, h, bundle: SteeringBundle) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Hermitian ``Q_c, Q_theta, Q_phi`` with, for every real ``w``,

    ``w^T Q_c w = |h^H diag(w) Phi v|^2`` and
    ``w^T Q_xi w = v^H W^H A_xi A_xi^H W v`` where ``W = diag(w) Phi``.
    """
    Phi = np.asarray(Phi, dtype=complex)
    v = np.asarray(v, dtype=complex)
    h = np.asarray(h, dtype=complex)
    if Phi.shape[1] != v.shape[0] or Phi.shape[0] != h.shape[0] or bundle.a.shape[0] != h.shape[0]:
        raise ValueError(f"dimension mismatch: Phi {Phi.shape}, v {v.shape}, h {h.shape}, a {bundle.a.shape}")
    u = Phi @ v
    c = u * h.conj()
    Q_c = np.outer(c, c.conj())
    uc = u.conj()[:, None]
    Q_theta = uc * bundle.gram_theta * u[None, :]
    Q_phi = uc * bundle.gram_phi * u[None, :]
    return Q_c, Q_theta, Q_phi


def holo_majorizer(Q_c, Q_theta, Q_phi, w_t, config: SystemConfig) -> np.ndarray:
    """Real symmetric matrix of the w-dependent part of the majorized objective."""
    w_t = np.asarray(w_t, dtype=float)
    M_w = config.alpha * Q_c.real
    c = _crb_weight(config)
    if c != 0:
        for name, Q in (("theta", Q_theta), ("phi", Q_phi)):
            q = float(w_t @ Q.real @ w_t)
            if not q > EXPANSION_FLOOR:
                raise DegenerateExpansionError(f"degenerate expansion point: w^T Q_{name} w = {q:.3e}")
            M_w = M_w + (c / q**2) * Q.real
    return 0.5 * (M_w + M_w.T)


def pga_update(
    w0,
    M_w,
    eta: float,
    t_max_w: int,
    eps: float,
    eta_min: float = 1e-6,
    callback: Callable[[int, np.ndarray, float], None] | None = None,
) -> np.ndarray:
    """Projected gradient ascent of ``w^T M_w w`` over the box [0, 1]^M.

    A step that would lower the objective is retried with half the step size
    down to ``eta_min``; if it still descends the iterate is kept and the
    loop stops.
    """
    M_w = np.asarray(M_w, dtype=float)
    w = np.clip(np.asarray(w0, dtype=float), 0.0, 1.0)
    f = float(w @ M_w @ w)
    for k in range(t_max_w):
        grad = 2.0 * (M_w @ w)
        step = eta
        while True:
            w_new = np.clip(w + step * grad, 0.0, 1.0)
            f_new = float(w_new @ M_w @ w_new)
            if f_new >= f or step <= eta_min:
                break
            step = max(step / 2, eta_min)
        if f_new < f:
            break
        change = np.linalg.norm(w_new - w) / max(1.0, np.linalg.norm(w))
        w, f = w_new, f_new
        if callback is not None:
            callback(k + 1, w, f)
        if change < eps:
            break
    return w


def evaluate_objective(state: BeamformerState, h, bundle: SteeringBundle, config: SystemConfig) -> ObjectiveBreakdown:
    W = state.W
    comm = comms.received_power(h, W, state.v_d)
    rep = sensing.crb(bundle, W, state.v_d, config.gamma, config.sigma_r2)
    weighted = config.alpha * comm - config.beta * (rep.crb_theta_diag + rep.crb_phi_diag)
    return ObjectiveBreakdown(
        comm_term=comm,
        crb_theta=rep.crb_theta_diag,
        crb_phi=rep.crb_phi_diag,
        weighted_objective=weighted,
        rate=float(np.log2(1 + comm / config.sigma_n2)),
        tx_power=comms.tx_power(W, state.v_d),
    )


def initial_state(config: SystemConfig, h, geometry: ArrayGeometry) -> BeamformerState:
    """Half-amplitude weights and the matched-filter digital beamformer."""
    w = np.full(config.M, 0.5)
    W = holographic_matrix(w, geometry.Phi)
    g = W.conj().T @ h
    v = update_digital(np.outer(g, g.conj()), W, config.P_total)
    return BeamformerState(w=w, v_d=v, Phi=geometry.Phi)


def _has_converged(prev: ObjectiveBreakdown, cur: ObjectiveBreakdown, eps: float) -> bool:
    return (
        abs(cur.rate - prev.rate) < eps
        and abs(cur.crb_theta - prev.crb_theta) < eps
        and abs(cur.crb_phi - prev.crb_phi) < eps
    )


def optimize(
    config: SystemConfig,
    h,
    geometry: ArrayGeometry,
    bundle: SteeringBundle | None = None,
    state: BeamformerState | None = None,
    on_digital: Callable[[np.ndarray, np.ndarray], None] | None = None,
    on_pga: Callable[[int, np.ndarray, float], None] | None = None,
) -> tuple[BeamformerState, ConvergenceTrace]:
    """Alternate digital and holographic updates until rate and both CRBs settle.

    ``on_digital(W, v)`` fires after each digital update and ``on_pga`` after
    each accepted inner PGA step; both exist for constraint auditing.
    """
    h = np.asarray(h, dtype=complex)
    bundle = steering_bundle(config) if bundle is None else bundle
    Phi = geometry.Phi
    state = initial_state(config, h, geometry) if state is None else state.copy()
    trace = ConvergenceTrace()
    try:
        prev = evaluate_objective(state, h, bundle, config)
    except sensing.UnobservableAngleError as exc:
        raise OptimizationError(0, exc) from exc

    for t in range(1, config.t_max + 1):
        try:
            M_t = digital_majorizer(h, Phi, state.w, bundle, state.v_d, config)
            W = state.W
            state.v_d = update_digital(M_t, W, config.P_total)
            if on_digital is not None:
                on_digital(W, state.v_d)

            Q_c, Q_t, Q_p = build_quadratic_forms(Phi, state.v_d, h, bundle)
            M_w = holo_majorizer(Q_c, Q_t, Q_p, state.w, config)
            steps = []

            def _inner(k, w, f):
                steps.append(k)
                if on_pga is not None:
                    on_pga(k, w, f)

            state.w = pga_update(state.w, M_w, config.eta, config.t_max_w, config.eps, config.eta_min, _inner)
            state.v_d = scale_to_power(state.v_d, state.W, config.P_total)
            cur = evaluate_objective(state, h, bundle, config)
        except (DegenerateExpansionError, NullSpaceEigenvectorError, sensing.UnobservableAngleError) as exc:
            raise OptimizationError(t, exc) from exc

        trace.records.append(cur)
        trace.inner_iterations.append(len(steps))
        if _has_converged(prev, cur, config.eps):
            trace.termination = TOLERANCE_MET
            break
        prev = cur
    return state, trace
