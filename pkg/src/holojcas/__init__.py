"""Hybrid holographic JCAS: angle CRBs on a reconfigurable holographic surface
and MM-based alternating optimization of digital and holographic beamformers."""

from .config import ConfigError, SystemConfig
from .geometry import ArrayGeometry, SteeringBundle, build_geometry, steering_bundle
from .harness import run_trial, sweep
from .optimizer import BeamformerState, ConvergenceTrace, ObjectiveBreakdown, optimize

__all__ = [
    "ArrayGeometry",
    "BeamformerState",
    "ConfigError",
    "ConvergenceTrace",
    "ObjectiveBreakdown",
    "SteeringBundle",
    "SystemConfig",
    "build_geometry",
    "optimize",
    "run_trial",
    "steering_bundle",
    "sweep",
]
