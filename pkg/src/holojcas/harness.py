"""Monte-Carlo experiment engine: paired proposed/benchmark trials and sweeps."""

from __future__ import annotations

import hashlib
import math
import os
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from . import comms, sensing
from .config import ConfigError, SystemConfig
from .geometry import ArrayGeometry, build_geometry, steering_bundle
from .numerics import make_rng
from .optimizer import (
    BeamformerState,
    NullSpaceEigenvectorError,
    OptimizationError,
    evaluate_objective,
    holographic_matrix,
    optimize,
    update_digital,
)

PROPOSED = "proposed"
BENCHMARK = "benchmark"
SCHEMES = (PROPOSED, BENCHMARK)
AXES = ("snr_db", "rf_chains", "aperture")

# sub-streams under (master_seed, trial_index)
CHANNEL_STREAM = 0
BENCHMARK_STREAM = 1

THREADS_ENV = "HOLO_JCAS_THREADS"


@dataclass
class TrialResult:
    trial_index: int
    scheme: str
    rate: float = float("nan")
    crb_theta: float = float("nan")
    crb_phi: float = float("nan")
    crb_theta_full: float = float("nan")
    crb_phi_full: float = float("nan")
    weighted_objective: float = float("nan")
    outer_iterations: int = 0
    converged: bool = False
    failed: bool = False
    error: str = ""
    channel_hash: str = ""
    w: np.ndarray | None = field(default=None, repr=False)
    v_d: np.ndarray | None = field(default=None, repr=False)
    wall_time: float = field(default=0.0, compare=False)

    def key(self) -> tuple:
        """Everything except wall time, for reproducibility checks."""
        arrays = tuple(None if x is None else x.tobytes() for x in (self.w, self.v_d))
        return (
            self.trial_index, self.scheme, self.rate, self.crb_theta, self.crb_phi,
            self.crb_theta_full, self.crb_phi_full, self.weighted_objective,
            self.outer_iterations, self.converged, self.failed, self.error,
            self.channel_hash, arrays,
        )


@dataclass(frozen=True)
class SweepPoint:
    axis_value: float
    scheme: str
    mean_rate: float
    mean_crb_theta_lin: float
    mean_crb_phi_lin: float
    mean_crb_theta_db: float
    mean_crb_phi_db: float
    mean_crb_theta_db_alt: float
    mean_crb_phi_db_alt: float
    mean_crb_theta_full_lin: float
    mean_crb_phi_full_lin: float
    std_rate: float
    n_ok: int
    n_failed: int


@dataclass
class SweepResult:
    axis: str
    values: list
    points: list[SweepPoint]
    trials: dict = field(default_factory=dict, repr=False)  # (axis_value, scheme) -> list[TrialResult]

    def point(self, axis_value, scheme: str) -> SweepPoint:
        for p in self.points:
            if p.axis_value == axis_value and p.scheme == scheme:
                return p
        raise KeyError((axis_value, scheme))


def channel_hash(h: np.ndarray) -> str:
    return hashlib.sha256(np.ascontiguousarray(h, dtype=complex).tobytes()).hexdigest()[:16]


def draw_channel(config: SystemConfig, trial_index: int) -> np.ndarray:
    return comms.rayleigh_channel(config.M, make_rng(config.master_seed, trial_index, CHANNEL_STREAM))


def benchmark_solution(config: SystemConfig, h, geometry: ArrayGeometry, rng: np.random.Generator) -> BeamformerState:
    """Uniform random holographic weights with the rate-optimal dominant eigenvector."""
    w = rng.uniform(0.0, 1.0, config.M)
    W = holographic_matrix(w, geometry.Phi)
    g = W.conj().T @ np.asarray(h, dtype=complex)
    v = update_digital(np.outer(g, g.conj()), W, config.P_total)
    return BeamformerState(w=w, v_d=v, Phi=geometry.Phi)


def _fill(result: TrialResult, state: BeamformerState, h, bundle, config: SystemConfig) -> None:
    obj = evaluate_objective(state, h, bundle, config)
    rep = sensing.crb(bundle, state.W, state.v_d, config.gamma, config.sigma_r2)
    result.rate = obj.rate
    result.crb_theta = obj.crb_theta
    result.crb_phi = obj.crb_phi
    result.crb_theta_full = rep.crb_theta_full
    result.crb_phi_full = rep.crb_phi_full
    result.weighted_objective = obj.weighted_objective
    result.w = state.w.copy()
    result.v_d = state.v_d.copy()


def run_trial(
    config: SystemConfig,
    trial_index: int,
    geometry: ArrayGeometry | None = None,
    bundle=None,
) -> tuple[TrialResult, TrialResult]:
    """One channel realization, solved by both schemes."""
    geometry = build_geometry(config) if geometry is None else geometry
    bundle = steering_bundle(config) if bundle is None else bundle
    h = draw_channel(config, trial_index)
    hh = channel_hash(h)

    proposed = TrialResult(trial_index, PROPOSED, channel_hash=hh)
    t0 = time.perf_counter()
    try:
        state, trace = optimize(config, h, geometry, bundle)
        _fill(proposed, state, h, bundle, config)
        proposed.outer_iterations = trace.iterations
        proposed.converged = trace.converged
    except (OptimizationError, NullSpaceEigenvectorError, sensing.UnobservableAngleError) as exc:
        proposed.failed = True
        proposed.error = str(exc)
    proposed.wall_time = time.perf_counter() - t0

    bench = TrialResult(trial_index, BENCHMARK, channel_hash=hh, converged=True)
    t0 = time.perf_counter()
    try:
        state = benchmark_solution(config, h, geometry, make_rng(config.master_seed, trial_index, BENCHMARK_STREAM))
        _fill(bench, state, h, bundle, config)
    except (NullSpaceEigenvectorError, sensing.UnobservableAngleError) as exc:
        bench.failed = True
        bench.error = str(exc)
    bench.wall_time = time.perf_counter() - t0
    return proposed, bench


def point_config(config: SystemConfig, axis: str, value) -> SystemConfig:
    if axis == "snr_db":
        return config.with_snr_db(float(value))
    if axis == "rf_chains":
        if float(value) != int(value):
            raise ConfigError(f"rf_chains values must be integers (got {value})")
        return config.replace(K=int(value))
    if axis == "aperture":
        if float(value) != int(value):
            raise ConfigError(f"aperture values must be integers (got {value})")
        return config.replace(M=int(value))
    raise ConfigError(f"unknown sweep axis {axis!r}; expected one of {AXES}")


def _mean(xs) -> float:
    return math.fsum(xs) / len(xs) if xs else float("nan")


def _db(x: float) -> float:
    return 10 * math.log10(x) if x > 0 else float("nan")


def aggregate(axis_value, scheme: str, trials: list[TrialResult]) -> SweepPoint:
    ok = [t for t in trials if not t.failed]
    rates = [t.rate for t in ok]
    mean_rate = _mean(rates)
    std_rate = math.sqrt(_mean([(r - mean_rate) ** 2 for r in rates])) if ok else float("nan")
    ct = _mean([t.crb_theta for t in ok])
    cp = _mean([t.crb_phi for t in ok])
    return SweepPoint(
        axis_value=axis_value,
        scheme=scheme,
        mean_rate=mean_rate,
        mean_crb_theta_lin=ct,
        mean_crb_phi_lin=cp,
        mean_crb_theta_db=_db(ct),
        mean_crb_phi_db=_db(cp),
        mean_crb_theta_db_alt=_mean([_db(t.crb_theta) for t in ok]),
        mean_crb_phi_db_alt=_mean([_db(t.crb_phi) for t in ok]),
        mean_crb_theta_full_lin=_mean([t.crb_theta_full for t in ok]),
        mean_crb_phi_full_lin=_mean([t.crb_phi_full for t in ok]),
        std_rate=std_rate,
        n_ok=len(ok),
        n_failed=len(trials) - len(ok),
    )


def _run_block(config: SystemConfig, trial_indices: list[int]) -> list[tuple[TrialResult, TrialResult]]:
    geometry = build_geometry(config)
    bundle = steering_bundle(config)
    return [run_trial(config, i, geometry, bundle) for i in trial_indices]


def default_workers() -> int:
    env = os.environ.get(THREADS_ENV)
    if env:
        return max(1, int(env))
    return 1


def sweep(
    config: SystemConfig,
    axis: str,
    values,
    n_trials: int,
    workers: int | None = None,
) -> SweepResult:
    """Paired trials at every axis value.

    Trial ``i`` at every point draws its channel from ``(master_seed, i)``,
    so points share channel realizations where dimensions allow and results
    do not depend on how trials are scheduled across workers.
    """
    values = list(values)
    if not values:
        raise ValueError("sweep needs at least one axis value")
    if n_trials < 1:
        raise ValueError("n_trials must be >= 1")
    configs = [point_config(config, axis, v) for v in values]  # validates every point up front

    workers = default_workers() if workers is None else max(1, int(workers))
    indices = list(range(n_trials))
    chunks = [indices[i::workers] for i in range(workers)] if workers > 1 else [indices]
    chunks = [c for c in chunks if c]

    jobs = [(pi, cfg, chunk) for pi, cfg in enumerate(configs) for chunk in chunks]
    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            outs = list(pool.map(_run_block, [j[1] for j in jobs], [j[2] for j in jobs]))
    else:
        outs = [_run_block(cfg, chunk) for _, cfg, chunk in jobs]

    per_point: dict[int, list[tuple[TrialResult, TrialResult]]] = {i: [] for i in range(len(values))}
    for (pi, _, _), out in zip(jobs, outs):
        per_point[pi].extend(out)

    points, trials = [], {}
    for pi, value in enumerate(values):
        pairs = sorted(per_point[pi], key=lambda p: p[0].trial_index)
        for s_idx, scheme in enumerate(SCHEMES):
            ts = [p[s_idx] for p in pairs]
            trials[(value, scheme)] = ts
            points.append(aggregate(value, scheme, ts))
    return SweepResult(axis=axis, values=values, points=points, trials=trials)
