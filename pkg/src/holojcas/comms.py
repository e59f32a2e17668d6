"""Channel draws and communication-side metrics."""

from __future__ import annotations

import numpy as np

from .numerics import complex_gaussian_vector


def rayleigh_channel(M: int, rng: np.random.Generator) -> np.ndarray:
    return complex_gaussian_vector(M, rng)


def _effective(W, v) -> np.ndarray:
    W = np.asarray(W, dtype=complex)
    v = np.asarray(v, dtype=complex)
    if W.ndim != 2 or v.ndim != 1 or W.shape[1] != v.shape[0]:
        raise ValueError(f"dimension mismatch: W is {W.shape}, v is {v.shape}")
    return W @ v


def received_power(h, W, v) -> float:
    """|h^H W v|^2."""
    x = _effective(W, v)
    h = np.asarray(h, dtype=complex)
    if h.shape != x.shape:
        raise ValueError(f"dimension mismatch: h is {h.shape}, W v is {x.shape}")
    return float(abs(np.vdot(h, x)) ** 2)


def rate(h, W, v, sigma_n2: float) -> float:
    if not sigma_n2 > 0:
        raise ValueError("sigma_n2 must be positive")
    return float(np.log2(1 + received_power(h, W, v) / sigma_n2))


def tx_power(W, v) -> float:
    x = _effective(W, v)
    return float(np.vdot(x, x).real)
