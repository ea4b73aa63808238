"""Phase-space distribution of a two-packet superposition."""

import math

import numpy as np
import pytest

from moire1d.wavepacket import GaussianWavepacket, evolve_quadratic
from moire1d.wigner import (WignerGrid, fringe_metrics, rotate_phase_space,
                            verify_rotation_theorem, wigner_of_superposition)


def pair(dz=5.0, dk=2.0, width=1.5, phase=0.4):
    a = GaussianWavepacket(center=-dz / 2, momentum=dk / 2, width=width)
    b = GaussianWavepacket(center=dz / 2, momentum=-dk / 2, width=width,
                           global_phase=phase)
    return a, b


def direct_wigner(packets, x, p):
    """Brute-force W(x,p) = (1/2pi) int psi(x+y/2) psi*(x-y/2) e^{-ipy} dy."""
    norm = 0.0
    y = np.linspace(-60, 60, 6001)
    dy = y[1] - y[0]
    psi = lambda z: sum(pk.evaluate(z) for pk in packets)
    vals = np.empty((x.size, p.size))
    z = np.linspace(-60, 60, 6001)
    norm = np.sum(np.abs(psi(z)) ** 2) * (z[1] - z[0])
    for i, xi in enumerate(x):
        f = psi(xi + y / 2) * np.conj(psi(xi - y / 2))
        ker = np.exp(-1j * np.outer(p, y))
        vals[i] = (ker @ f).real * dy / (2 * math.pi)
    return vals / norm


class TestWignerOfSuperposition:
    def test_matches_direct_integral(self):
        a, b = pair()
        x = np.linspace(-6, 6, 25)
        p = np.linspace(-3, 3, 25)
        w = wigner_of_superposition(a, b, x_grid=x, p_grid=p)
        ref = direct_wigner([a, b], x, p)
        assert np.max(np.abs(w.values - ref)) < 1e-10

    def test_normalized(self):
        a, b = pair()
        w = wigner_of_superposition(a, b, n=256)
        assert w.integral() == pytest.approx(1.0, abs=1e-6)

    def test_marginal_is_position_density(self):
        a, b = pair()
        w = wigner_of_superposition(a, b, n=256)
        psi = a.evaluate(w.x_grid) + b.evaluate(w.x_grid)
        dens = np.abs(psi) ** 2
        dens /= np.trapezoid(dens, w.x_grid)
        assert np.allclose(w.marginal_x(), dens, atol=1e-8)

    def test_resolution_guard(self):
        a, b = pair(dz=30.0, dk=10.0)
        with pytest.raises(ValueError, match="under-resolves"):
            wigner_of_superposition(a, b, n=32)

    def test_requires_equal_spin(self):
        a, _ = pair()
        b = GaussianWavepacket(center=2, momentum=0, width=1.5, spin=2)
        with pytest.raises(ValueError):
            wigner_of_superposition(a, b)


class TestRotation:
    def test_full_period_identity(self):
        a, b = pair()
        w = wigner_of_superposition(a, b, n=128)
        omega, eta = 1.0e-3, 1.0e-3
        rot = rotate_phase_space(w, omega, 2 * math.pi / omega, eta=eta)
        assert np.max(np.abs(rot.values - w.values)) < 1e-12

    def test_composition(self):
        a, b = pair()
        w = wigner_of_superposition(a, b, n=128)
        omega, eta = 1.0e-3, 1.0e-3
        quarter = math.pi / (2 * omega)
        once = rotate_phase_space(w, omega, 2 * quarter, eta=eta)
        twice = rotate_phase_space(
            rotate_phase_space(w, omega, quarter, eta=eta), omega, quarter,
            eta=eta)
        assert np.max(np.abs(once.values - twice.values)) < 1e-9

    def test_spline_path_close_to_closed_form(self):
        a, b = pair()
        # wide grid so the distribution has decayed at the edge and the
        # zero-fill outside the grid is harmless
        w = wigner_of_superposition(a, b, n=256,
                                    x_grid=np.linspace(-14, 14, 256),
                                    p_grid=np.linspace(-6, 6, 256))
        bare = WignerGrid(x_grid=w.x_grid, p_grid=w.p_grid,
                          values=w.values, norm=w.norm)   # no evaluator
        omega, eta = 1.0e-3, 1.0e-3
        tau = 0.3 * math.pi / omega
        exact = rotate_phase_space(w, omega, tau, eta=eta)
        interp = rotate_phase_space(bare, omega, tau, eta=eta)
        scale = np.max(np.abs(exact.values))
        assert np.max(np.abs(exact.values - interp.values)) / scale < 1e-3


class TestFringeMetrics:
    def test_count_matches_separation(self):
        # pure position separation: fringes along p with wavevector dz
        a, b = pair(dz=6.0, dk=0.0, width=1.5)
        w = wigner_of_superposition(a, b, n=256)
        m = fringe_metrics(w, a, b, omega=1.0e-3, eta=1.0e-3)
        assert m["q"] > 0
        assert m["count"] == pytest.approx((2 / math.pi) * m["q"]
                                           * m["envelope_sigma"])

    def test_phase_tracks_relative_phase(self):
        # enough fringes that the real-signal demodulation has no
        # negative-frequency leakage at the 1e-3 level
        a1, b1 = pair(dz=10.0, dk=4.0, phase=0.0)
        a2, b2 = pair(dz=10.0, dk=4.0, phase=0.7)
        w1 = wigner_of_superposition(a1, b1, n=256)
        w2 = wigner_of_superposition(a2, b2, n=256)
        m1 = fringe_metrics(w1, a1, b1, omega=1.0e-3, eta=1.0e-3)
        m2 = fringe_metrics(w2, a2, b2, omega=1.0e-3, eta=1.0e-3)
        d = (m2["phase"] - m1["phase"]) % (2 * math.pi)
        assert min(d, 2 * math.pi - d) == pytest.approx(0.7, abs=1e-3)


class TestRotationTheorem:
    def test_quarter_turn(self):
        a, b = pair()
        omega = 1.0e-3
        rep = verify_rotation_theorem(a, b, omega, math.pi / (2 * omega),
                                      n=128, eta=1.0e-3)
        assert rep["l2_error"] < 1e-10
        rel = abs(rep["fringe_count_after"] - rep["fringe_count_before"]) \
            / rep["fringe_count_before"]
        assert rel < 1e-9

    def test_consistent_with_direct_evolution(self):
        a, b = pair()
        omega, eta = 1.0e-3, 1.0e-3
        tau = 0.35 * 2 * math.pi / omega
        pot = (0.0, 0.0, omega ** 2 / eta, 0.0)
        ea = evolve_quadratic(a, tau, pot, eta=eta)
        eb = evolve_quadratic(b, tau, pot, eta=eta)
        w0 = wigner_of_superposition(a, b, n=160)
        w1 = wigner_of_superposition(ea, eb, n=160, x_grid=w0.x_grid,
                                     p_grid=w0.p_grid)
        rot = rotate_phase_space(w0, omega, tau, eta=eta)
        scale = math.sqrt(float(np.sum(w1.values ** 2)))
        err = math.sqrt(float(np.sum((w1.values - rot.values) ** 2))) / scale
        assert err < 1e-10


class TestExports:
    def test_binary_round_trip(self, tmp_path):
        a, b = pair()
        w = wigner_of_superposition(a, b, n=64)
        path = tmp_path / "w.f64"
        w.to_binary(path)
        import json
        with open(str(path) + ".json") as fh:
            side = json.load(fh)
        back = np.fromfile(path).reshape(side["shape"])
        assert np.array_equal(back, w.values)

    def test_csv_header_names_units(self, tmp_path):
        a, b = pair(dz=1.0, dk=0.5)
        w = wigner_of_superposition(a, b, n=16, x_grid=np.linspace(-8, 8, 16),
                                    p_grid=np.linspace(-2, 2, 16))
        path = tmp_path / "w.csv"
        w.to_csv(path)
        with open(path) as fh:
            assert fh.readline().strip() == "x_um,p_rad_per_um,w"
