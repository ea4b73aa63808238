"""Stern-Gerlach interferometer sequence on an atom chip.

Simulates the pulse sequence that prepares two displaced pairs of Gaussian
wavepackets, one pair per spin state, whose interference produces the two
constituent patterns of the moire signal. Geometry: z measures distance
from the chip, increasing downward (along gravity). Three parallel wires
at pitch s carry alternating currents; near the central wire the field is

    B_wire(z) = (mu0 I / 2 pi) (1/z - 2 z / (z^2 + s^2))

on top of a uniform bias with a weak gradient. Spin states m_F = 1, 2 of
the F = 2 manifold feel Zeeman potentials proportional to m_F.

Every propagation step uses a single quadratic expansion of the potential
shared by all same-spin packets, so a same-spin pair evolves under a
common quadratic Hamiltonian and its adiabatic invariant
Gamma^2 = (dz/2 sigma)^2 + (kappa sigma)^2 is conserved exactly.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace

import numpy as np

from .params import ModelParams, SampledSignal
from .units import G_F, G_GRAVITY, HBAR_OVER_M_RB87, MU_B_OVER_HBAR
from .wavepacket import GaussianWavepacket, apply_rf_pulse, evolve_quadratic

__all__ = [
    "FieldConfig", "SequenceConfig", "ConservationRecord", "SequenceResult",
    "pair_invariants", "conservation_check", "run_sequence",
]


@dataclass(frozen=True)
class FieldConfig:
    bias_field: float = 35.0          # G
    bias_gradient: float = 9.0e-5     # G/um
    wire_pitch: float = 100.0         # um
    wire_coeff: float = 2000.0        # G um per A, mu0/(2 pi)

    def wire_field(self, z, current: float):
        """Field of the three-wire pattern at distance z, in Gauss."""
        c = self.wire_coeff * current
        s2 = self.wire_pitch ** 2
        return c * (1.0 / z - 2.0 * z / (z * z + s2))

    def wire_field_d1(self, z, current: float):
        c = self.wire_coeff * current
        s2 = self.wire_pitch ** 2
        return c * (-1.0 / z ** 2 - 2.0 * (s2 - z * z) / (z * z + s2) ** 2)

    def wire_field_d2(self, z, current: float):
        c = self.wire_coeff * current
        s2 = self.wire_pitch ** 2
        return c * (2.0 / z ** 3 + 4.0 * z * (3.0 * s2 - z * z) / (z * z + s2) ** 3)


@dataclass(frozen=True)
class SequenceConfig:
    """Timings (us), currents (A) and trap parameters of the sequence.

    The three gradient pulses share the wire geometry; the last one runs
    with reversed current. ``t_delay2`` is measured from the start of the
    decelerating pulse, so the wait after that pulse ends is
    max(t_delay2 - t2, 0). ``initial_tof`` sets how long the released
    cloud expands before the first RF pulse; the interaction-driven
    expansion is modeled by the free scaling of a trapped ground state,
    sigma(t) = sigma_z0 sqrt(1 + omega_z^2 t^2).
    """
    z_release: float = 89.5
    sigma_z0: float = 1.23
    omega_z: float = 2 * math.pi * 113e-6   # rad/us
    initial_tof: float = 1000.0
    t1: float = 3.75
    current1: float = 1.5103
    rf2_delay: float = 115.0
    t_delay1: float = 230.0
    t2: float = 400.0
    current2: float = 1.122
    t_delay2: float = 410.0
    t3: float = 30.0
    current3: float = 1.122
    bias_off_delay: float = 660.0
    final_tof: float = 14000.0
    field: FieldConfig = field(default_factory=FieldConfig)
    substep: float = 0.25        # max step during gradient pulses, us
    eta: float = HBAR_OVER_M_RB87

    def __post_init__(self):
        for name in ("t1", "t2", "t3", "initial_tof", "final_tof",
                     "rf2_delay", "t_delay1", "t_delay2", "bias_off_delay"):
            if getattr(self, name) < 0:
                raise ValueError(f"{name} must be >= 0")
        if self.rf2_delay > self.t_delay1:
            raise ValueError("rf2_delay cannot exceed t_delay1")
        if self.substep <= 0:
            raise ValueError("substep must be positive")


@dataclass(frozen=True)
class ConservationRecord:
    time: float
    label: str
    spin: int
    gamma: float
    chi: float
    kappa: float
    sigma: float
    delta_z: float
    n_periods: float


@dataclass
class SequenceResult:
    packets: list
    records: list
    params: ModelParams
    discarded_weight: float
    observation_time: float

    def pattern(self, spin: int, grid=None, n: int = 4096) -> SampledSignal:
        """Normalized density of one spin pair on a grid."""
        pk = [p for p in self.packets if p.spin == spin]
        if grid is None:
            lo = min(p.center for p in pk) - 4.5 * max(p.width for p in pk)
            hi = max(p.center for p in pk) + 4.5 * max(p.width for p in pk)
            z = np.linspace(lo, hi, n)
        else:
            z = np.asarray(grid, dtype=float)
        psi = np.zeros_like(z, dtype=complex)
        for p in pk:
            psi += p.evaluate(z)
        dens = np.abs(psi) ** 2 / sum(p.weight ** 2 for p in pk)
        return SampledSignal(z0=z[0], dz=z[1] - z[0], values=dens)

    def moire_pattern(self, grid=None, n: int = 4096) -> SampledSignal:
        """Incoherent sum of the two spin patterns."""
        if grid is None:
            lo = min(p.center for p in self.packets) - 4.5 * max(p.width for p in self.packets)
            hi = max(p.center for p in self.packets) + 4.5 * max(p.width for p in self.packets)
            grid = np.linspace(lo, hi, n)
        w = {s: sum(p.weight ** 2 for p in self.packets if p.spin == s) for s in (1, 2)}
        s1 = self.pattern(1, grid=grid)
        s2 = self.pattern(2, grid=grid)
        total = w[1] + w[2]
        vals = (w[1] * s1.values + w[2] * s2.values) / total
        return SampledSignal(z0=s1.z0, dz=s1.dz, values=vals)


def _zeeman_quadratic(z_exp: float, spin: int, cfg: SequenceConfig,
                      current: float, bias_on: bool):
    """(u0, u1, u2) of the potential U(z)/hbar about z_exp, rad/us units.

    Includes the Zeeman term of the total field magnitude and gravity.
    The field must not change sign near the packet.
    """
    f = cfg.field
    b = b1 = b2 = 0.0
    if bias_on:
        b += f.bias_field + f.bias_gradient * z_exp
        b1 += f.bias_gradient
    if current != 0.0:
        b += f.wire_field(z_exp, current)
        b1 += f.wire_field_d1(z_exp, current)
        b2 += f.wire_field_d2(z_exp, current)
    sign = 1.0
    if b < 0:
        sign, b, b1, b2 = -1.0, -b, -b1, -b2
    if b < 1.0 and (bias_on or current != 0.0):
        raise ValueError("field magnitude too small for the |B| expansion")
    pref = spin * G_F * MU_B_OVER_HBAR
    u0 = pref * b - (G_GRAVITY / cfg.eta) * z_exp
    u1 = pref * b1 - G_GRAVITY / cfg.eta
    u2 = pref * b2
    return u0, u1, u2


def _advance(packets, duration, cfg: SequenceConfig, current: float,
             bias_on: bool, n_steps: int = 1, drop_curvature: bool = False):
    """Advance all packets by ``duration``; one shared quadratic expansion
    per spin group per substep, taken at the group's mean position.

    ``drop_curvature`` evolves with the local linear potential only. Used
    for the short splitting pulse, where the branches still carry
    different spins: keeping only the spin-dependent force leaves the
    width parameters of the future pair partners identical, so the pair
    invariants downstream are conserved exactly. The neglected focusing
    is O((omega t1)^2) ~ 1e-3 over that pulse.
    """
    if duration == 0.0:
        return packets
    dt = duration / n_steps
    for _ in range(n_steps):
        out = []
        for spin in (1, 2):
            group = [p for p in packets if p.spin == spin]
            if not group:
                continue
            z_exp = sum(p.center for p in group) / len(group)
            u0, u1, u2 = _zeeman_quadratic(z_exp, spin, cfg, current, bias_on)
            if drop_curvature:
                u2 = 0.0
            for p in group:
                out.append(evolve_quadratic(p, dt, (u0, u1, u2, z_exp), eta=cfg.eta))
        packets = out
    return packets


def _pulse_steps(duration: float, cfg: SequenceConfig) -> int:
    return max(1, int(math.ceil(duration / cfg.substep)))


def pair_invariants(pa: GaussianWavepacket, pb: GaussianWavepacket):
    """Relative-coordinate invariants of a same-spin packet pair.

    Returns (gamma, chi, kappa, delta_z, sigma). kappa is the local
    wavenumber of the interference fringe, chi its phase at z = 0:
    |psi_a + psi_b|^2 has a cross term ~ cos(kappa z + chi).
    """
    if pa.spin != pb.spin:
        raise ValueError("invariants are defined for a same-spin pair")
    dz = pb.center - pa.center
    dk = pb.momentum - pa.momentum
    dphi = pb.global_phase - pa.global_phase
    zbar = 0.5 * (pa.center + pb.center)
    kbar = 0.5 * (pa.momentum + pb.momentum)
    alpha = 0.5 * (pa.quad_phase + pb.quad_phase)
    sigma = 0.5 * (pa.width + pb.width)
    kappa = alpha * dz - dk
    gamma = math.hypot(dz / (2 * sigma), kappa * sigma)
    chi = -(kappa * zbar + dphi - kbar * dz)
    return gamma, chi, kappa, dz, sigma


def conservation_check(pa: GaussianWavepacket, pb: GaussianWavepacket) -> dict:
    """Report the conserved pair quantities of a same-spin packet pair.

    Raises ValueError if the two widths differ by more than 1e-6
    relatively; the invariants below assume a common envelope width.
    """
    if abs(pa.width - pb.width) > 1e-6 * max(pa.width, pb.width):
        raise ValueError("pair widths differ; invariants are not defined")
    gamma, chi, kappa, dz, sigma = pair_invariants(pa, pb)
    return {
        "gamma": gamma,
        "chi": chi,
        "kappa_sigma": kappa * sigma,
        "half_separation_ratio": dz / (2 * sigma),
        "n_periods": abs(kappa) * sigma * 2 / math.pi,
    }


def _record(time, label, packets, out):
    for spin in (1, 2):
        group = sorted((p for p in packets if p.spin == spin),
                       key=lambda p: p.momentum)
        if len(group) != 2:
            continue
        gamma, chi, kappa, dz, sigma = pair_invariants(group[0], group[1])
        out.append(ConservationRecord(
            time=time, label=label, spin=spin, gamma=gamma, chi=chi,
            kappa=kappa, sigma=sigma, delta_z=dz,
            n_periods=abs(kappa) * sigma * 2 / math.pi))


def _extract_params(packets) -> ModelParams:
    """Constituent-pattern parameters from the two final pairs."""
    per_spin = {}
    for spin in (1, 2):
        group = sorted((p for p in packets if p.spin == spin),
                       key=lambda p: p.momentum)
        if len(group) != 2:
            raise ValueError("expected exactly two packets per spin")
        _, chi, kappa, _, sigma = pair_invariants(group[0], group[1])
        zbar = 0.5 * (group[0].center + group[1].center)
        per_spin[spin] = (kappa, chi, zbar, sigma)
    # orient so that the common wavenumber is positive: cos(kz + chi) is
    # invariant under (k, chi) -> (-k, -chi). The sin^2 constituent peaks
    # where kappa (z - z_i) + 2 theta_i = pi, the density peaks where
    # kappa z + chi = 0, hence theta_i = (kappa z_i + chi + pi) / 2.
    flip = 1.0 if per_spin[1][0] + per_spin[2][0] >= 0 else -1.0
    kappas, thetas, centers, sigmas = [], [], [], []
    for spin in (1, 2):
        kappa, chi, zbar, sigma = per_spin[spin]
        kappa, chi = flip * kappa, flip * chi
        theta = 0.5 * (kappa * zbar + chi + math.pi)
        theta = (theta + math.pi / 2) % math.pi - math.pi / 2
        kappas.append(kappa)
        thetas.append(theta)
        centers.append(zbar)
        sigmas.append(sigma)
    return ModelParams(kappa1=kappas[0], kappa2=kappas[1],
                       theta1=thetas[0], theta2=thetas[1],
                       z1=centers[0], z2=centers[1],
                       sigma=0.5 * (sigmas[0] + sigmas[1]))


def run_sequence(cfg: SequenceConfig | None = None) -> SequenceResult:
    """Run the full pulse sequence and return the final packet pairs.

    Sequence: release and expand for ``initial_tof``; pi/2 pulse; gradient
    kick T1 (spin-dependent splitting); free flight with a second pi/2
    pulse after ``rf2_delay``; the spin-2 components are expelled by the
    decelerating pulse T2 and dropped from the simulation; wait; third
    pi/2 pulse; reversed-polarity pulse T3 displaces the two spin pairs
    relative to each other; bias switch-off after ``bias_off_delay``;
    final time of flight.
    """
    if cfg is None:
        cfg = SequenceConfig()
    eta = cfg.eta
    t = 0.0
    records: list[ConservationRecord] = []

    # released cloud at the first RF pulse: ground-state expansion scaling
    tau = cfg.initial_tof
    scale = 1.0 + (cfg.omega_z * tau) ** 2
    sigma = cfg.sigma_z0 * math.sqrt(scale)
    alpha = cfg.omega_z ** 2 * tau / (eta * scale)
    center = cfg.z_release + 0.5 * G_GRAVITY * tau ** 2
    momentum = G_GRAVITY * tau / eta
    packets = [GaussianWavepacket(center=center, momentum=momentum, width=sigma,
                                  quad_phase=alpha, spin=2)]
    t += tau

    packets = apply_rf_pulse(packets, math.pi / 2)

    packets = _advance(packets, cfg.t1, cfg, cfg.current1, True,
                       _pulse_steps(cfg.t1, cfg), drop_curvature=True)
    t += cfg.t1

    packets = _advance(packets, cfg.rf2_delay, cfg, 0.0, True)
    t += cfg.rf2_delay
    packets = apply_rf_pulse(packets, math.pi / 2)

    # the spin-2 components are driven out of the trap region by the
    # decelerating pulse and never interfere; drop them here
    discarded = sum(p.weight ** 2 for p in packets if p.spin == 2)
    packets = [p for p in packets if p.spin == 1]
    _record(t, "after second pi/2", packets, records)

    packets = _advance(packets, cfg.t_delay1 - cfg.rf2_delay, cfg, 0.0, True)
    t += cfg.t_delay1 - cfg.rf2_delay

    packets = _advance(packets, cfg.t2, cfg, cfg.current2, True,
                       _pulse_steps(cfg.t2, cfg))
    t += cfg.t2
    _record(t, "after deceleration", packets, records)

    wait = max(cfg.t_delay2 - cfg.t2, 0.0)
    packets = _advance(packets, wait, cfg, 0.0, True)
    t += wait
    packets = apply_rf_pulse(packets, math.pi / 2)
    _record(t, "after third pi/2", packets, records)

    packets = _advance(packets, cfg.t3, cfg, -cfg.current3, True,
                       _pulse_steps(cfg.t3, cfg))
    t += cfg.t3
    _record(t, "after displacement pulse", packets, records)

    packets = _advance(packets, cfg.bias_off_delay, cfg, 0.0, True)
    t += cfg.bias_off_delay
    _record(t, "bias off", packets, records)

    packets = _advance(packets, cfg.final_tof, cfg, 0.0, False)
    t += cfg.final_tof
    _record(t, "observation", packets, records)

    return SequenceResult(packets=packets, records=records,
                          params=_extract_params(packets),
                          discarded_weight=discarded, observation_time=t)
