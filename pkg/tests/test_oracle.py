"""The brute-force validators themselves: determinism, refinement, edge
cases.  (Their agreement with the closed forms is covered by the influence
tests and the acceptance suite.)"""
import numpy as np
import pytest

from ctpfield.influence import InfluenceFunctional
from ctpfield.oracle import (MomentumLattice, damped_fourier_transform,
                             double_time_retarded, lattice_pairing,
                             meter_moment_oracle, mode_sum_retarded_point,
                             pi_integral_overlap)
from ctpfield.protocols import alice_protocol, bob_protocol, zero_protocol


def _infl(**kw):
    base = dict(gamma_A=0.0, gamma_B=0.0, gamma_AB=0.0, g_R_BB=0.0,
                chi_bar_B=0.0, m_decoh=0.0)
    base.update(kw)
    return InfluenceFunctional(**base)


class TestMomentumLattice:
    def test_shell_minimum(self):
        with pytest.raises(ValueError):
            MomentumLattice(k_max=10.0, n_shells=32)

    def test_k_max_requirement(self):
        lat = MomentumLattice(k_max=10.0, n_shells=64)
        with pytest.raises(ValueError):
            lat.validate_for(alice_protocol(1.0, 2.0),
                             bob_protocol(1.0, 1.0), m=1.0)

    def test_nodes_cover_range(self):
        lat = MomentumLattice(k_max=50.0, n_shells=64)
        k, w = lat.nodes()
        assert k.min() > 0 and k.max() < 50.0
        assert np.sum(w) == pytest.approx(50.0)
        # shell quadrature integrates a cubic exactly
        assert np.sum(w * k ** 3) == pytest.approx(50.0 ** 4 / 4.0, rel=1e-13)


class TestLatticePairing:
    def test_spacelike_retarded_cancellation(self, unit_field):
        la = alice_protocol(1.0, 0.5)
        lb = bob_protocol(1.0, 2.0)
        lat = MomentumLattice(k_max=800.0, n_shells=512)
        res = lattice_pairing("retarded", la, lb, 1.0, unit_field, lat)
        assert abs(res.value) < 1e-8

    def test_keldysh_agreement_is_deterministic(self, unit_field):
        la = alice_protocol(1.0, 2.0)
        lat = MomentumLattice(k_max=150.0, n_shells=256)
        a = lattice_pairing("keldysh", la, la, 0.0, unit_field, lat)
        b = lattice_pairing("keldysh", la, la, 0.0, unit_field, lat)
        assert a == b  # bit-identical rerun

    def test_refinement_reported(self, unit_field):
        la = alice_protocol(1.0, 2.0)
        lat = MomentumLattice(k_max=150.0, n_shells=256)
        res = lattice_pairing("keldysh", la, la, 0.0, unit_field, lat)
        assert res.converged
        assert res.error < 1e-6 * abs(res.value) + 1e-12

    def test_zero_protocol_shortcut(self, unit_field):
        lat = MomentumLattice(k_max=100.0, n_shells=64)
        res = lattice_pairing("keldysh", zero_protocol(), zero_protocol(),
                              0.0, unit_field, lat)
        assert res.value == 0.0 and res.converged

    def test_unknown_kind_rejected(self, unit_field):
        lat = MomentumLattice(k_max=100.0, n_shells=64)
        with pytest.raises(ValueError):
            lattice_pairing("feynman", bob_protocol(1.0, 1.0),
                            bob_protocol(1.0, 1.0), 0.0, unit_field, lat)


class TestCausalCancellation:
    def test_mode_sum_spacelike_residual(self):
        lat = MomentumLattice(k_max=800.0, n_shells=512)
        res = mode_sum_retarded_point(0.5, 1.0, 1.0, lat, sigma=0.02)
        assert abs(res) < 1e-8

    def test_refinement_halves_residual(self):
        residuals = []
        for shells in (64, 128, 256):
            lat = MomentumLattice(k_max=800.0, n_shells=shells)
            residuals.append(abs(mode_sum_retarded_point(
                0.5, 1.0, 1.0, lat, sigma=0.01)))
        assert residuals[1] <= 0.5 * residuals[0]
        assert residuals[2] <= 0.5 * residuals[1]


class TestPiIntegralOverlap:
    def test_normalised_gaussian(self):
        assert pi_integral_overlap(_infl(), 1.0) == pytest.approx(1.0,
                                                                  abs=1e-12)

    def test_pure_emission(self):
        val = pi_integral_overlap(_infl(gamma_A=1.0), 1.0)
        assert val == pytest.approx(np.exp(-1.0), abs=1e-12)

    def test_combined_suppression(self):
        val = pi_integral_overlap(_infl(gamma_A=0.3, m_decoh=1.0), 0.5)
        assert val == pytest.approx(np.exp(-0.3) * np.exp(-0.5), abs=1e-10)

    def test_node_minimum(self):
        with pytest.raises(ValueError):
            pi_integral_overlap(_infl(), 1.0, n_nodes=64)


class TestMeterMomentOracle:
    def test_normalisation(self):
        infl = _infl(gamma_B=0.8, g_R_BB=1.2, chi_bar_B=0.5)
        assert meter_moment_oracle(infl, 1.0, +1, 0) == pytest.approx(
            1.0, abs=1e-10)

    def test_mean_tracks_spin(self):
        infl = _infl(gamma_B=0.8, g_R_BB=1.2, chi_bar_B=0.5)
        assert meter_moment_oracle(infl, 1.0, +1, 1) == pytest.approx(
            0.5, rel=1e-8)
        assert meter_moment_oracle(infl, 1.0, -1, 1) == pytest.approx(
            -0.5, rel=1e-8)

    def test_variance(self):
        infl = _infl(gamma_B=0.8, g_R_BB=1.2, chi_bar_B=0.5)
        sigma2 = 1.2 ** 2 / 2.0 + 0.5 * (0.8 + 1.0)
        assert meter_moment_oracle(infl, 1.0, +1, 2) == pytest.approx(
            sigma2, rel=1e-8)

    def test_order_validation(self):
        with pytest.raises(ValueError):
            meter_moment_oracle(_infl(), 1.0, +1, 3)


class TestDoubleTimeRetarded:
    def test_massless_delta_line(self, massless_field, spec):
        la = alice_protocol(1.0, 2.0)
        lb = bob_protocol(1.0, 2.0)
        val = double_time_retarded(la, lb, 1.0, massless_field, spec)
        assert val == pytest.approx(0.25 / (4 * np.pi), abs=1e-12)

    def test_massive_matches_main_path(self, unit_field, spec):
        from ctpfield.influence import retarded_pairing
        la = alice_protocol(1.0, 2.0)
        lb = bob_protocol(1.0, 1.0)
        brute = double_time_retarded(la, lb, 0.5, unit_field, spec)
        main = retarded_pairing(la, lb, 0.5, unit_field, spec)
        assert brute == pytest.approx(main, rel=1e-7)

    def test_plateau_with_mass_deferred_to_lattice(self, unit_field, spec):
        with pytest.raises(ValueError):
            double_time_retarded(bob_protocol(1.0, 1.0),
                                 alice_protocol(1.0, 2.0), 0.5, unit_field,
                                 spec)


class TestDampedFourier:
    def test_matches_closed_form(self):
        from ctpfield.protocols import fourier_transform
        p = alice_protocol(1.0, 1.0)
        val = damped_fourier_transform(p, 1.0)
        assert val == pytest.approx(fourier_transform(p, 1.0), abs=1e-9)

    def test_deterministic(self):
        p = bob_protocol(1.0, 1.5)
        assert damped_fourier_transform(p, 2.0) == damped_fourier_transform(
            p, 2.0)
