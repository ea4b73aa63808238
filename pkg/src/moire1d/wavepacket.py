"""Gaussian wavepackets and their evolution under quadratic potentials.

A packet is parametrized as

    psi(z) = w e^{i phi} (2 pi sigma^2)^{-1/4}
             exp(-(z-zc)^2/4 sigma^2 + i alpha (z-zc)^2/2 + i k (z-zc))

Potentials are expressed as angular frequencies U(z) = V(z)/hbar in
rad/us. For a potential that is quadratic over a step, the evolution maps
the Gaussian family onto itself exactly: the center follows the classical
trajectory, the complex width parameter beta = alpha + i/(2 sigma^2)
transforms by the Moebius action of the classical monodromy matrix, and
the global phase accumulates the classical action plus the Gouy term
-(1/2) arg(M11 + M12 beta).
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass, replace

import numpy as np

from .units import HBAR_OVER_M_RB87

__all__ = ["GaussianWavepacket", "evolve_free", "evolve_quadratic", "apply_rf_pulse"]

# nodes/weights of 10-point Gauss-Legendre on [0, 1], for the action integral
_GL_X, _GL_W = np.polynomial.legendre.leggauss(10)
_GL_X = 0.5 * (_GL_X + 1.0)
_GL_W = 0.5 * _GL_W


@dataclass(frozen=True)
class GaussianWavepacket:
    center: float            # um
    momentum: float          # rad/um
    width: float             # um
    quad_phase: float = 0.0  # rad/um^2
    global_phase: float = 0.0
    spin: int = 1            # 1 or 2
    weight: float = 1.0      # amplitude magnitude

    def __post_init__(self):
        if not self.width > 0:
            raise ValueError("width must be positive")
        if self.spin not in (1, 2):
            raise ValueError("spin label must be 1 or 2")

    @property
    def beta(self) -> complex:
        return self.quad_phase + 0.5j / self.width ** 2

    @property
    def amplitude(self) -> complex:
        return self.weight * cmath.exp(1j * self.global_phase)

    def evaluate(self, z) -> np.ndarray:
        """Complex wavefunction including weight and global phase."""
        z = np.asarray(z, dtype=float)
        u = z - self.center
        return (self.amplitude * (2 * math.pi * self.width ** 2) ** -0.25
                * np.exp(-u ** 2 / (4 * self.width ** 2)
                         + 0.5j * self.quad_phase * u ** 2
                         + 1j * self.momentum * u))


def _monodromy(u2: float, dt: float, eta: float):
    """Classical monodromy matrix of d/dt (dz, dk) = ((0, eta), (-u2, 0))."""
    if u2 == 0.0:
        return 1.0, eta * dt, 0.0, 1.0
    if u2 > 0:
        w = math.sqrt(eta * u2)
        c, s = math.cos(w * dt), math.sin(w * dt)
        return c, (eta / w) * s, -(w / eta) * s, c
    g = math.sqrt(-eta * u2)
    c, s = math.cosh(g * dt), math.sinh(g * dt)
    return c, (eta / g) * s, (g / eta) * s, c


def evolve_quadratic(wp: GaussianWavepacket, dt: float, potential,
                     eta: float = HBAR_OVER_M_RB87,
                     max_center_step: float | None = None) -> GaussianWavepacket:
    """Exact evolution for one step under a frozen quadratic potential.

    ``potential`` is (u0, u1, u2, z_exp): value [rad/us], gradient
    [rad/(us um)] and curvature [rad/(us um^2)] of U at the expansion
    point ``z_exp``. ``max_center_step`` optionally rejects steps whose
    center motion exceeds the scale on which the quadratic fit is trusted.
    """
    if dt < 0:
        raise ValueError("dt must be >= 0")
    if dt == 0.0:
        return wp
    u0, u1, u2, z_exp = potential

    m11, m12, m21, m22 = _monodromy(u2, dt, eta)

    # classical trajectory of the packet center
    z0 = wp.center - z_exp
    k0 = wp.momentum
    if u2 == 0.0:
        def traj(t):
            z = z0 + eta * k0 * t - 0.5 * eta * u1 * t * t
            k = k0 - u1 * t
            return z, k
    else:
        zeq = -u1 / u2
        if u2 > 0:
            w = math.sqrt(eta * u2)

            def traj(t):
                c, s = math.cos(w * t), math.sin(w * t)
                z = zeq + (z0 - zeq) * c + (eta * k0 / w) * s
                k = -(w / eta) * (z0 - zeq) * s + k0 * c
                return z, k
        else:
            g = math.sqrt(-eta * u2)

            def traj(t):
                c, s = math.cosh(g * t), math.sinh(g * t)
                z = zeq + (z0 - zeq) * c + (eta * k0 / g) * s
                k = (g / eta) * (z0 - zeq) * s + k0 * c
                return z, k

    z1, k1 = traj(dt)
    if max_center_step is not None and abs(z1 - z0) > max_center_step:
        raise ValueError(
            f"center moved {abs(z1 - z0):.3g} um in one step, beyond the "
            f"trusted quadratic range {max_center_step:.3g} um")

    # width parameter via the Moebius action of the monodromy
    beta0 = wp.beta
    denom = m11 + m12 * beta0
    beta1 = (m21 + m22 * beta0) / denom
    sigma1 = math.sqrt(0.5 / beta1.imag)
    alpha1 = beta1.real

    # classical action by Gauss-Legendre quadrature (exact for u2 == 0)
    action = 0.0
    for x, wgt in zip(_GL_X, _GL_W):
        zt, kt = traj(x * dt)
        u_at = u0 + u1 * zt + 0.5 * u2 * zt * zt
        action += wgt * (0.5 * eta * kt * kt - u_at)
    action *= dt

    phase1 = wp.global_phase + action - 0.5 * cmath.phase(denom)
    return replace(wp, center=z_exp + z1, momentum=k1, width=sigma1,
                   quad_phase=alpha1, global_phase=phase1)


def evolve_free(wp: GaussianWavepacket, dt: float,
                eta: float = HBAR_OVER_M_RB87,
                gravity: float = 0.0) -> GaussianWavepacket:
    """Free-space evolution (optionally with a uniform force).

    ``gravity`` is the acceleration in um/us^2 along +z; it enters as the
    linear potential U = -(gravity/eta) z.
    """
    return evolve_quadratic(wp, dt, (0.0, -gravity / eta, 0.0, wp.center), eta=eta)


def _coalesce(packets, tol=1e-12):
    """Merge packets of equal spin and identical motional state by complex
    amplitude addition; drop negligible amplitudes."""
    out: list[GaussianWavepacket] = []
    for p in packets:
        merged = False
        for i, q in enumerate(out):
            if (p.spin == q.spin
                    and abs(p.center - q.center) < tol
                    and abs(p.momentum - q.momentum) < tol
                    and abs(p.width - q.width) < tol
                    and abs(p.quad_phase - q.quad_phase) < tol):
                amp = p.amplitude + q.amplitude
                out[i] = replace(q, weight=abs(amp),
                                 global_phase=cmath.phase(amp) if abs(amp) > 0 else 0.0)
                merged = True
                break
        if not merged:
            out.append(p)
    return [p for p in out if p.weight > 1e-14]


def apply_rf_pulse(branches, angle: float):
    """Instantaneous two-level rotation by ``angle`` on every packet.

    Each packet splits into a same-spin part with amplitude cos(angle/2)
    and a flipped-spin part with amplitude sin(angle/2) (and the standard
    -i rotation phase). Total weight^2 is preserved; packets that end up
    with identical motional state and spin are coherently recombined.
    """
    if not 0.0 <= angle <= math.pi:
        raise ValueError("pulse angle must lie in [0, pi]")
    c, s = math.cos(angle / 2), math.sin(angle / 2)
    out = []
    for p in branches:
        amp = p.amplitude
        keep = amp * c
        flip = amp * s * -1j
        if abs(keep) > 0:
            out.append(replace(p, weight=abs(keep), global_phase=cmath.phase(keep)))
        if abs(flip) > 0:
            out.append(replace(p, spin=3 - p.spin, weight=abs(flip),
                               global_phase=cmath.phase(flip)))
    return _coalesce(out)
