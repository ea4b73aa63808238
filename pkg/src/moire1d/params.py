"""Core data types: two-constituent model parameters and sampled 1D signals."""

from __future__ import annotations

import io
import json
import math
from dataclasses import dataclass, field

import numpy as np

__all__ = ["ModelParams", "SampledSignal", "default_grid"]


@dataclass(frozen=True)
class ModelParams:
    """Parameters of the two-constituent finite-size pattern.

    Two Gaussian-enveloped periodic constituents with wavenumbers
    ``kappa1``/``kappa2``, oscillation phases ``theta1``/``theta2``,
    envelope centers ``z1``/``z2`` and a common envelope width ``sigma``.
    """

    kappa1: float
    kappa2: float
    theta1: float
    theta2: float
    z1: float
    z2: float
    sigma: float

    def __post_init__(self):
        if not self.sigma > 0:
            raise ValueError(f"sigma must be positive, got {self.sigma}")

    @classmethod
    def symmetric(cls, kappa, delta_phi, sigma, theta=0.0, z_center=0.0):
        """Common-wavenumber parameters from (kappa, delta_phi, sigma).

        The envelope separation is delta_z = delta_phi / kappa and the pair
        is placed symmetrically around ``z_center`` with theta1 = theta2.
        """
        dz = delta_phi / kappa
        return cls(kappa1=kappa, kappa2=kappa, theta1=theta, theta2=theta,
                   z1=z_center - dz / 2, z2=z_center + dz / 2, sigma=sigma)

    @property
    def kappa(self) -> float:
        """Mean constituent wavenumber (kappa1 + kappa2) / 2."""
        return 0.5 * (self.kappa1 + self.kappa2)

    @property
    def common_kappa(self) -> bool:
        return self.kappa1 == self.kappa2

    @property
    def delta_z(self) -> float:
        return self.z2 - self.z1

    @property
    def delta_phi(self) -> float:
        """Relative constituent phase kappa * delta_z (common-kappa form)."""
        return self.kappa * self.delta_z

    @property
    def z_center(self) -> float:
        return 0.5 * (self.z1 + self.z2)

    @property
    def n_periods(self) -> float:
        """Number of periods over the 4-sigma envelope, (2/pi) kappa sigma."""
        return (2.0 / math.pi) * self.kappa * self.sigma

    # -- JSON round trip ---------------------------------------------------

    def to_json(self) -> str:
        return json.dumps({
            "kappa1": self.kappa1, "kappa2": self.kappa2,
            "theta1": self.theta1, "theta2": self.theta2,
            "z1": self.z1, "z2": self.z2, "sigma": self.sigma,
        }, indent=2)

    @classmethod
    def from_json(cls, text: str) -> "ModelParams":
        d = json.loads(text)
        return cls(**{k: float(d[k]) for k in
                      ("kappa1", "kappa2", "theta1", "theta2", "z1", "z2", "sigma")})


@dataclass
class SampledSignal:
    """A real-valued signal on a uniform spatial grid."""

    z0: float
    dz: float
    values: np.ndarray = field(repr=False)

    def __post_init__(self):
        self.values = np.asarray(self.values, dtype=float)
        if not self.dz > 0:
            raise ValueError(f"dz must be positive, got {self.dz}")
        if self.values.ndim != 1 or self.values.size < 2:
            raise ValueError("values must be a 1D array of length >= 2")
        if not np.all(np.isfinite(self.values)):
            raise ValueError("values must be finite")

    @property
    def z(self) -> np.ndarray:
        return self.z0 + self.dz * np.arange(self.values.size)

    def __len__(self):
        return self.values.size

    # -- CSV round trip ----------------------------------------------------

    def to_csv(self, path=None) -> str:
        buf = io.StringIO()
        buf.write("z_um,value\n")
        for zi, vi in zip(self.z, self.values):
            buf.write(f"{zi:.12g},{vi:.12g}\n")
        text = buf.getvalue()
        if path is not None:
            with open(path, "w") as fh:
                fh.write(text)
        return text

    @classmethod
    def from_csv(cls, path) -> "SampledSignal":
        data = np.loadtxt(path, delimiter=",", skiprows=1)
        z, v = data[:, 0], data[:, 1]
        dz = float(np.mean(np.diff(z)))
        return cls(z0=float(z[0]), dz=dz, values=v)


def default_grid(params: ModelParams, n: int = 4096, half_span_sigmas: float = 6.0):
    """(z0, dz) for an ``n``-point grid spanning +-``half_span_sigmas`` * sigma.

    Centered on the envelope midpoint and widened to cover both envelope
    centers. The 4096/6-sigma default keeps FFT leakage negligible for
    patterns with up to ~20 periods.
    """
    half = half_span_sigmas * params.sigma + 0.5 * abs(params.delta_z)
    z0 = params.z_center - half
    dz = 2.0 * half / (n - 1)
    return z0, dz
