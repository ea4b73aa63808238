"""Field model and the full interferometer sequence."""

import math

import numpy as np
import pytest

from moire1d.interferometer import (FieldConfig, SequenceConfig,
                                    conservation_check, pair_invariants,
                                    run_sequence)
from moire1d.wavepacket import GaussianWavepacket, evolve_quadratic


class TestFieldConfig:
    def test_wire_field_derivatives(self):
        f = FieldConfig()
        h = 0.05       # balances truncation against roundoff for d2
        for z in (60.0, 89.5, 140.0):
            b = lambda x: f.wire_field(x, 1.2)
            d1 = (b(z + h) - b(z - h)) / (2 * h)
            d2 = (b(z + h) - 2 * b(z) + b(z - h)) / h ** 2
            assert f.wire_field_d1(z, 1.2) == pytest.approx(d1, rel=1e-5)
            assert f.wire_field_d2(z, 1.2) == pytest.approx(d2, rel=1e-4)

    def test_wire_field_scales_with_current(self):
        f = FieldConfig()
        assert f.wire_field(90.0, 2.0) == pytest.approx(2 * f.wire_field(90.0, 1.0))


class TestPairInvariants:
    def pair(self):
        a = GaussianWavepacket(center=-3.0, momentum=0.5, width=5.0,
                               quad_phase=0.02, global_phase=0.1)
        b = GaussianWavepacket(center=3.0, momentum=-0.5, width=5.0,
                               quad_phase=0.02, global_phase=-0.2)
        return a, b

    def test_kappa_and_chi_describe_the_fringe(self):
        a, b = self.pair()
        gamma, chi, kappa, dz, sigma = pair_invariants(a, b)
        # density cross term ~ E(z) cos(kappa z + chi) with E >= 0, so its
        # projection onto e^{i kappa z} carries the phase chi
        z = np.linspace(-40, 40, 200001)
        dens = np.abs(a.evaluate(z) + b.evaluate(z)) ** 2
        env = np.abs(a.evaluate(z)) ** 2 + np.abs(b.evaluate(z)) ** 2
        cross = dens - env
        proj = np.sum(cross * np.exp(-1j * kappa * z)) * (z[1] - z[0])
        assert abs(np.angle(proj * np.exp(-1j * chi))) < 1e-6

    def test_conserved_under_common_quadratic(self):
        a, b = self.pair()
        g0, _, k0, dz0, s0 = pair_invariants(a, b)
        pot = (0.5, 0.02, 4e-4, 0.0)
        for dt in (40.0, 160.0):
            ea = evolve_quadratic(a, dt, pot)
            eb = evolve_quadratic(b, dt, pot)
            g1, _, k1, dz1, s1 = pair_invariants(ea, eb)
            assert g1 == pytest.approx(g0, rel=1e-12)

    def test_requires_same_spin(self):
        a, _ = self.pair()
        b = GaussianWavepacket(center=3.0, momentum=0.3, width=5.0, spin=2)
        with pytest.raises(ValueError):
            pair_invariants(a, b)


class TestConservationCheck:
    def test_reports_invariants(self):
        a = GaussianWavepacket(center=-2.0, momentum=0.1, width=4.0)
        b = GaussianWavepacket(center=2.0, momentum=-0.1, width=4.0)
        rep = conservation_check(a, b)
        gamma, chi, kappa, dz, sigma = pair_invariants(a, b)
        assert rep["gamma"] == pytest.approx(gamma)
        assert rep["kappa_sigma"] == pytest.approx(kappa * sigma)
        assert rep["gamma"] == pytest.approx(
            math.hypot(rep["half_separation_ratio"], rep["kappa_sigma"]))

    def test_rejects_width_mismatch(self):
        a = GaussianWavepacket(center=0.0, momentum=0.0, width=4.0)
        b = GaussianWavepacket(center=1.0, momentum=0.0, width=4.2)
        with pytest.raises(ValueError, match="width"):
            conservation_check(a, b)


class TestSequenceConfig:
    def test_rejects_negative_durations(self):
        with pytest.raises(ValueError):
            SequenceConfig(t2=-5.0)

    def test_rejects_late_second_pulse(self):
        with pytest.raises(ValueError):
            SequenceConfig(rf2_delay=500.0, t_delay1=230.0)


class TestRunSequence:
    @pytest.fixture(scope="class")
    def result(self):
        return run_sequence(SequenceConfig())

    def test_final_state_is_two_pairs(self, result):
        spins = sorted(p.spin for p in result.packets)
        assert spins == [1, 1, 2, 2]

    def test_period_number_near_target(self, result):
        assert result.params.n_periods == pytest.approx(5.61, rel=0.05)

    def test_gamma_conserved_per_spin(self, result):
        for spin in (1, 2):
            g = [r.gamma for r in result.records if r.spin == spin]
            assert len(g) >= 4
            assert (max(g) - min(g)) / max(g) < 1e-6

    def test_equal_oscillation_phases(self, result):
        assert abs(result.params.theta1 - result.params.theta2) < 1e-6

    def test_separation_term_negligible(self, result):
        rec = result.records[-1]
        ratio = (rec.delta_z / (2 * rec.sigma)) ** 2 / (rec.kappa * rec.sigma) ** 2
        assert ratio < 0.02

    def test_moire_pattern_well_formed(self, result):
        s = result.moire_pattern()
        assert np.all(np.isfinite(s.values))
        assert np.all(s.values >= 0)

    def test_degenerate_without_gradients(self):
        # no translation pulse and no bias gradient: both spins see the
        # same potentials after the last splitter, so the patterns coincide
        cfg = SequenceConfig(t3=0.0, field=FieldConfig(bias_gradient=0.0))
        res = run_sequence(cfg)
        grid = res.moire_pattern().z
        s1 = res.pattern(1, grid=grid)
        s2 = res.pattern(2, grid=grid)
        assert np.allclose(s1.values, s2.values, atol=1e-8)
