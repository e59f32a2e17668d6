"""Small complex linear-algebra kernel shared by the rest of the package."""

from __future__ import annotations

import numpy as np

HERMITIAN_TOL = 1e-10
RESIDUAL_TOL = 1e-9


class NotHermitianError(ValueError):
    pass


class EigenConvergenceError(RuntimeError):
    def __init__(self, message: str, residual: float):
        super().__init__(f"{message} (residual={residual:.3e})")
        self.residual = residual


def kron(a, b) -> np.ndarray:
    """Kronecker product of two vectors: ``out[i*q + j] = a[i] * b[j]``."""
    a = np.asarray(a, dtype=complex).ravel()
    b = np.asarray(b, dtype=complex).ravel()
    if a.size == 0 or b.size == 0:
        raise ValueError("kron requires non-empty vectors")
    return np.outer(a, b).ravel()


def hadamard(A, B) -> np.ndarray:
    A = np.asarray(A)
    B = np.asarray(B)
    if A.shape != B.shape:
        raise ValueError(f"hadamard dimension mismatch: {A.shape} vs {B.shape}")
    return A * B


def fix_phase(x: np.ndarray, floor: float = 1e-12) -> np.ndarray:
    """Rotate ``x`` so its first entry with modulus above ``floor`` is real positive."""
    idx = np.flatnonzero(np.abs(x) > floor)
    if idx.size == 0:
        return x
    first = x[idx[0]]
    return x * (np.abs(first) / first)


def hermitian_top_eig(A) -> tuple[float, np.ndarray]:
    """Largest eigenvalue and a deterministic unit eigenvector of a Hermitian matrix.

    The input is symmetrized before the solve. The returned eigenvector has
    its phase fixed so that the first non-negligible entry is real and
    positive, which makes degenerate cases reproducible.
    """
    A = np.asarray(A, dtype=complex)
    if A.ndim != 2 or A.shape[0] != A.shape[1]:
        raise ValueError(f"expected a square matrix, got shape {A.shape}")
    norm = np.linalg.norm(A)
    asym = np.linalg.norm(A - A.conj().T)
    if asym / max(1.0, norm) > HERMITIAN_TOL:
        raise NotHermitianError(f"matrix is not Hermitian: relative skew {asym / max(1.0, norm):.3e}")
    A = 0.5 * (A + A.conj().T)
    if not np.all(np.isfinite(A)):
        raise ValueError("matrix has non-finite entries")

    try:
        vals, vecs = np.linalg.eigh(A)
    except np.linalg.LinAlgError as exc:
        raise EigenConvergenceError(f"eigh failed: {exc}", float("nan")) from exc
    lam = float(vals[-1])
    e = vecs[:, -1]
    e = fix_phase(e / np.linalg.norm(e))

    residual = float(np.linalg.norm(A @ e - lam * e))
    if residual > RESIDUAL_TOL * max(norm, np.finfo(float).tiny):
        raise EigenConvergenceError("top eigenpair residual above bound", residual)
    return lam, e


def make_rng(master_seed: int, *stream: int) -> np.random.Generator:
    """Independent generator for ``(master_seed, *stream)``.

    Streams are derived with ``SeedSequence`` spawn keys, so the sample
    sequence of a trial does not depend on which other trials ran or in what
    order.
    """
    ss = np.random.SeedSequence(entropy=int(master_seed), spawn_key=tuple(int(s) for s in stream))
    return np.random.Generator(np.random.PCG64(ss))


def complex_gaussian_vector(n: int, rng: np.random.Generator) -> np.ndarray:
    """i.i.d. CN(0, 1) samples (real and imaginary parts each N(0, 1/2))."""
    if n < 1:
        raise ValueError("n must be >= 1")
    parts = rng.standard_normal((n, 2)) * np.sqrt(0.5)
    return parts[:, 0] + 1j * parts[:, 1]
