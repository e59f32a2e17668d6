"""System configuration for the holographic JCAS model."""

from __future__ import annotations

import math
from dataclasses import dataclass, field, fields, replace

SPEED_OF_LIGHT = 299_792_458.0


class ConfigError(ValueError):
    """Raised when a configuration violates one of its invariants."""


def _is_perfect_square(n: int) -> bool:
    return n >= 0 and math.isqrt(n) ** 2 == n


@dataclass(frozen=True)
class SystemConfig:
    """Physical and algorithmic parameters.

    Angles are in radians, powers and noise variances in watts. When
    ``d_x``/``d_y`` are left as ``None`` they default to a quarter wavelength.
    """

    frequency: float = 20e9
    d_x: float | None = None
    d_y: float | None = None
    M: int = 36
    K: int = 3
    P_total: float = 1.0
    sigma_n2: float = 1.0
    sigma_r2: float = 1.0
    alpha: float = 1.0
    beta: float = 1.0
    gamma: complex = 1.0 + 0.0j
    theta_t: float = math.radians(45.0)
    phi_t: float = math.radians(60.0)
    n_s: float = math.sqrt(3.0)
    eta: float = 0.01
    eps: float = 1e-5
    t_max: int = 100
    t_max_w: int = 200
    master_seed: int = 0
    # backtracking floor for the PGA step
    eta_min: float = field(default=1e-6, repr=False)

    def __post_init__(self):
        lam = SPEED_OF_LIGHT / self.frequency if self.frequency > 0 else float("nan")
        if self.d_x is None:
            object.__setattr__(self, "d_x", lam / 4)
        if self.d_y is None:
            object.__setattr__(self, "d_y", lam / 4)
        object.__setattr__(self, "gamma", complex(self.gamma))
        self.validate()

    @property
    def wavelength(self) -> float:
        return SPEED_OF_LIGHT / self.frequency

    @property
    def k_f(self) -> float:
        return 2 * math.pi / self.wavelength

    @property
    def k_s(self) -> float:
        """Magnitude of the guided reference-wave vector."""
        return 2 * math.pi * self.n_s * self.frequency / SPEED_OF_LIGHT

    @property
    def side(self) -> int:
        return math.isqrt(self.M)

    @property
    def snr_db(self) -> float:
        return 10 * math.log10(self.P_total / self.sigma_n2)

    @property
    def crb_scale(self) -> float:
        """sigma_r^2 / (2 |gamma|^2)."""
        return self.sigma_r2 / (2 * abs(self.gamma) ** 2)

    def validate(self) -> None:
        if not (self.frequency > 0 and math.isfinite(self.frequency)):
            raise ConfigError("frequency must be positive")
        if isinstance(self.M, bool) or not isinstance(self.M, int):
            raise ConfigError("M must be an integer")
        if not _is_perfect_square(self.M) or self.M < 4:
            raise ConfigError(f"M must be a perfect square with sqrt(M) >= 2 (got M={self.M})")
        half = self.wavelength / 2
        for name in ("d_x", "d_y"):
            d = getattr(self, name)
            if not (0 < d < half):
                raise ConfigError(f"{name} must satisfy 0 < {name} < lambda/2 = {half:.6g} m (got {d})")
        if isinstance(self.K, bool) or not isinstance(self.K, int) or not (1 <= self.K <= self.M):
            raise ConfigError(f"K must be an integer with 1 <= K <= M (got K={self.K}, M={self.M})")
        positive = ("P_total", "sigma_n2", "sigma_r2", "eta", "eps", "n_s")
        for name in positive:
            if not getattr(self, name) > 0:
                raise ConfigError(f"{name} must be > 0 (got {getattr(self, name)})")
        for name in ("alpha", "beta"):
            if not getattr(self, name) >= 0:
                raise ConfigError(f"{name} must be >= 0 (got {getattr(self, name)})")
        if not abs(self.gamma) > 0:
            raise ConfigError("|gamma| must be > 0")
        for name in ("t_max", "t_max_w"):
            if int(getattr(self, name)) < 1:
                raise ConfigError(f"{name} must be >= 1")
        for name in ("theta_t", "phi_t"):
            if not math.isfinite(getattr(self, name)):
                raise ConfigError(f"{name} must be finite")

    def with_snr_db(self, snr_db: float) -> "SystemConfig":
        """Copy with both noise variances set from SNR = P_total / sigma_n^2."""
        noise = self.P_total / 10 ** (snr_db / 10)
        return replace(self, sigma_n2=noise, sigma_r2=noise)

    def replace(self, **changes) -> "SystemConfig":
        return replace(self, **changes)


CONFIG_FIELDS = tuple(f.name for f in fields(SystemConfig))
