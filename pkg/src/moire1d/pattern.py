"""Generation and local-phase analysis of the two-constituent pattern.

The pattern is a sum of two Gaussian-enveloped sin^2 oscillations,

    V(z) = exp(-(z-z1)^2/2 sigma^2) sin^2(kappa1 (z-z1)/2 + theta1)
         + exp(-(z-z2)^2/2 sigma^2) sin^2(kappa2 (z-z2)/2 + theta2).

All functions here are pure; grids are passed as (z0, dz, n) tuples or
default to a 4096-point grid covering both envelopes.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .params import ModelParams, SampledSignal, default_grid

__all__ = [
    "PhaseProfile",
    "generate_pattern",
    "positive_frequency_part",
    "local_phase",
]


@dataclass
class PhaseProfile:
    """Local phase and phase gradient of the pattern's analytic signal."""

    z0: float
    dz: float
    phase: np.ndarray = field(repr=False)
    gradient: np.ndarray = field(repr=False)
    singular_mask: np.ndarray = field(repr=False)   # True where amplitude ~ 0
    degenerate: bool = False

    @property
    def z(self) -> np.ndarray:
        return self.z0 + self.dz * np.arange(self.phase.size)


def _resolve_grid(params: ModelParams, grid):
    if grid is None:
        z0, dz = default_grid(params)
        return z0, dz, 4096
    z0, dz, n = grid
    return float(z0), float(dz), int(n)


def _check_grid(params: ModelParams, z0, dz, n):
    if dz > math.pi / (4.0 * params.kappa):
        raise ValueError(
            f"grid step {dz:.4g} um undersamples the oscillation "
            f"(need dz <= pi/4kappa = {math.pi / (4 * params.kappa):.4g} um)")
    lo = min(params.z1, params.z2) - 4.0 * params.sigma
    hi = max(params.z1, params.z2) + 4.0 * params.sigma
    if z0 > lo or z0 + dz * (n - 1) < hi:
        raise ValueError("grid does not span both envelopes to 4 sigma")


def generate_pattern(params: ModelParams, grid=None) -> SampledSignal:
    """Evaluate the two-constituent pattern on a uniform grid.

    Each term lies in [0, 1], so the total is bounded by 2. Raises if the
    grid undersamples the oscillation or does not cover the envelopes.
    """
    z0, dz, n = _resolve_grid(params, grid)
    _check_grid(params, z0, dz, n)
    z = z0 + dz * np.arange(n)
    t1 = (np.exp(-((z - params.z1) ** 2) / (2 * params.sigma ** 2))
          * np.sin(params.kappa1 * (z - params.z1) / 2 + params.theta1) ** 2)
    t2 = (np.exp(-((z - params.z2) ** 2) / (2 * params.sigma ** 2))
          * np.sin(params.kappa2 * (z - params.z2) / 2 + params.theta2) ** 2)
    return SampledSignal(z0=z0, dz=dz, values=t1 + t2)


def _phi_tilde(params: ModelParams):
    # z-independent phases of the analytic-signal factorization
    k = params.kappa
    return 2 * params.theta1 - k * params.z1, 2 * params.theta2 - k * params.z2


def positive_frequency_part(params: ModelParams, grid=None) -> np.ndarray:
    """Complex positive-frequency component of the pattern.

        V+(z) = (1/2) e^{i kappa z} [e^{i phi1} G-(z) + e^{i phi2} G+(z)],
        phi_j = 2 theta_j - kappa z_j,

    where G-+ are the two Gaussian envelopes. The full pattern decomposes
    exactly as

        V(z) = (G- + G+)/2 - Re V+(z),

    i.e. V+ carries the oscillatory component and its modulus is the local
    oscillation amplitude. Requires a common wavenumber kappa1 == kappa2.
    """
    if not params.common_kappa:
        raise ValueError("positive-frequency form requires kappa1 == kappa2")
    z0, dz, n = _resolve_grid(params, grid)
    z = z0 + dz * np.arange(n)
    k = params.kappa
    gm = np.exp(-((z - params.z1) ** 2) / (2 * params.sigma ** 2))
    gp = np.exp(-((z - params.z2) ** 2) / (2 * params.sigma ** 2))
    ph1, ph2 = _phi_tilde(params)
    return 0.5 * np.exp(1j * k * z) * (gm * np.exp(1j * ph1) + gp * np.exp(1j * ph2))


def local_phase(params: ModelParams, grid=None) -> PhaseProfile:
    """Local phase and phase gradient of the analytic signal.

    Closed forms (common kappa, equal envelope widths):

        phase(z)    = kappa z + phi1
                      - atan2(sin dphi, exp(-(z-zc) dphi / kappa sigma^2) + cos dphi)
        gradient(z) = kappa (1 - dphi sin dphi
                      / (2 (kappa sigma)^2 (cosh[(z-zc) dphi/kappa sigma^2] + cos dphi)))

    with dphi = phi1 - phi2 and zc the envelope midpoint. At dphi an odd
    multiple of pi the amplitude vanishes at zc and the gradient is
    singular; those points are masked and the profile flagged degenerate.
    """
    if not params.common_kappa:
        raise ValueError("local phase closed form requires kappa1 == kappa2")
    z0, dz, n = _resolve_grid(params, grid)
    z = z0 + dz * np.arange(n)
    k, sig = params.kappa, params.sigma
    ph1, ph2 = _phi_tilde(params)
    dphi = ph1 - ph2
    zc = params.z_center
    u = (z - zc) * dphi / (k * sig ** 2)

    denom = np.exp(-u) + math.cos(dphi)
    phase = k * z + ph1 - np.arctan2(math.sin(dphi), denom)

    cosh_term = np.cosh(u) + math.cos(dphi)
    # amplitude^2 of the bracket is prop. to 2 e^{-u} (cosh u + cos dphi);
    # cosh_term -> 0 only for dphi at an odd multiple of pi, where the
    # amplitude vanishes at zc and the phase gradient diverges
    singular = cosh_term < 1e-3
    degenerate = bool(np.any(singular))
    with np.errstate(divide="ignore", invalid="ignore"):
        grad = k * (1.0 - dphi * math.sin(dphi)
                    / (2.0 * (k * sig) ** 2 * cosh_term))
    grad = np.where(singular, np.nan, grad)
    return PhaseProfile(z0=z0, dz=dz, phase=phase, gradient=grad,
                        singular_mask=singular, degenerate=degenerate)
