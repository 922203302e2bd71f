"""Observables: overlap, meter statistics, duality, particle number."""
import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from ctpfield.greens import FieldParams
from ctpfield.influence import (ExperimentSetup, InfluenceFunctional,
                                IRDivergenceError, compute_influence,
                                keldysh_pairing)
from ctpfield.observables import (GaussianDistribution, distinguishability_threshold,
                                  duality_report, meter_distribution,
                                  optimal_epsilon, overlap, particle_number,
                                  two_level_trace_distance)
from ctpfield.oracle import meter_moment_oracle, pi_integral_overlap
from ctpfield.protocols import alice_protocol, bob_protocol, zero_protocol


def _infl(**kw):
    base = dict(gamma_A=0.0, gamma_B=0.0, gamma_AB=0.0, g_R_BB=0.0,
                chi_bar_B=0.0, m_decoh=0.0)
    base.update(kw)
    return InfluenceFunctional(**base)


class TestOverlap:
    def test_no_decoherence(self):
        assert overlap(_infl(), 1.0) == 1.0

    def test_pure_emission(self):
        assert overlap(_infl(gamma_A=math.log(2.0)), 1.0) == pytest.approx(0.5)

    def test_measurement_decoherence(self):
        eps2 = 0.7
        val = overlap(_infl(m_decoh=2.0 * math.sqrt(eps2)), eps2)
        assert val == pytest.approx(math.exp(-1.0), rel=1e-12)

    def test_sigma_components(self):
        ov = overlap(_infl(gamma_A=0.2, m_decoh=0.5), 1.0)
        assert ov.imag == 0.0  # <sigma_y> = -Im = 0 identically

    def test_matches_pi_integral(self, rng):
        for _ in range(25):
            infl = _infl(gamma_A=rng.uniform(0, 4),
                         m_decoh=rng.uniform(-4, 4))
            eps2 = rng.uniform(0.2, 8.0)
            assert abs(overlap(infl, eps2)
                       - pi_integral_overlap(infl, eps2)) < 1e-8


class TestMeterDistribution:
    def test_bare_meter(self):
        d = meter_distribution(_infl(), 2.0, +1)
        assert d.mean == 0.0 and d.variance == pytest.approx(1.0)

    def test_indistinguishable_when_unsourced(self):
        dp = meter_distribution(_infl(gamma_B=0.5, g_R_BB=1.0), 1.0, +1)
        dm = meter_distribution(_infl(gamma_B=0.5, g_R_BB=1.0), 1.0, -1)
        assert dp == dm

    def test_sigma_formula(self):
        d = meter_distribution(_infl(g_R_BB=1.0), 1.0, +1)
        assert d.variance == pytest.approx(1.0)

    def test_moments_vs_oracle(self, rng):
        for _ in range(5):
            infl = _infl(gamma_B=rng.uniform(0, 2),
                         g_R_BB=rng.uniform(-2, 2),
                         chi_bar_B=rng.uniform(-2, 2))
            eps2 = rng.uniform(0.3, 4.0)
            spin = -1 if rng.uniform() < 0.5 else 1
            d = meter_distribution(infl, eps2, spin)
            assert meter_moment_oracle(infl, eps2, spin, 0) == pytest.approx(
                1.0, abs=1e-10)
            assert meter_moment_oracle(infl, eps2, spin, 1) == pytest.approx(
                d.mean, rel=1e-6, abs=1e-9)
            assert meter_moment_oracle(infl, eps2, spin, 2) == pytest.approx(
                d.variance, rel=1e-6)

    def test_distribution_normalised(self):
        d = GaussianDistribution(mean=0.3, variance=2.0)
        x = np.linspace(-20, 21, 200_001)
        assert np.trapezoid(d.pdf(x), x) == pytest.approx(1.0, abs=1e-10)

    def test_variance_must_be_positive(self):
        with pytest.raises(ValueError):
            GaussianDistribution(mean=0.0, variance=0.0)


class TestOptimalEpsilon:
    def test_paper_values(self):
        opt = optimal_epsilon(_infl(g_R_BB=4.0, gamma_B=2.0))
        assert opt.eps2_opt == 4.0 and opt.sigma2_opt == 5.0
        assert not opt.degenerate

    def test_degenerate_boundary(self):
        opt = optimal_epsilon(_infl(g_R_BB=0.0))
        assert opt.eps2_opt == 0.0 and opt.degenerate

    def test_absolute_value(self):
        opt = optimal_epsilon(_infl(g_R_BB=-3.0))
        assert opt.eps2_opt == 3.0 and opt.sigma2_opt == 3.0

    def test_argmin_by_scan(self):
        infl = _infl(g_R_BB=1.7, gamma_B=0.9)
        grid = np.geomspace(0.05, 50.0, 3000)
        sig = [meter_distribution(infl, float(e), +1).variance for e in grid]
        argmin = grid[int(np.argmin(sig))]
        assert argmin == pytest.approx(1.7, rel=0.01)


class TestDistinguishability:
    def test_zero_signal(self):
        assert distinguishability_threshold(_infl(g_R_BB=1.0), 1.0) == 0.0

    def test_saturation(self):
        assert distinguishability_threshold(
            _infl(chi_bar_B=1e4), 1.0) == pytest.approx(1.0)

    def test_standard_normal_interval(self):
        """chi_bar = Sigma: D = erf(1/sqrt(2)), cross-checked against the
        (1/2) int |P+ - P-| trace-distance quadrature."""
        infl = _infl(gamma_B=1.0)
        eps2 = 1.0
        sigma2 = meter_distribution(infl, eps2, +1).variance
        infl2 = _infl(gamma_B=1.0, chi_bar_B=math.sqrt(sigma2))
        val = distinguishability_threshold(infl2, eps2)
        assert val == pytest.approx(0.6826894921370859, abs=1e-12)
        x = np.linspace(-40, 40, 2_000_001)
        pp = meter_distribution(infl2, eps2, +1)
        pm = meter_distribution(infl2, eps2, -1)
        tv = 0.5 * np.trapezoid(np.abs(pp.pdf(x) - pm.pdf(x)), x)
        assert val == pytest.approx(tv, abs=1e-8)

    def test_monotone_in_signal(self):
        vals = [distinguishability_threshold(
            _infl(gamma_B=1.0, chi_bar_B=c), 1.0)
            for c in np.linspace(0, 5, 40)]
        assert np.all(np.diff(vals) >= 0)


class TestTwoLevelTraceDistance:
    def test_identical_states(self):
        assert two_level_trace_distance(1.0) == 0.0

    def test_orthogonal_states(self):
        assert two_level_trace_distance(0.0) == pytest.approx(1.0)

    def test_three_four_five(self):
        assert two_level_trace_distance(0.6) == pytest.approx(0.8)

    def test_rejects_out_of_range(self):
        with pytest.raises(ValueError):
            two_level_trace_distance(1.5)
        with pytest.raises(ValueError):
            two_level_trace_distance(-0.1)

    @given(v=st.floats(0.0, 1.0))
    @settings(max_examples=100, deadline=None)
    def test_pythagorean_identity(self, v):
        d = two_level_trace_distance(v)
        assert v * v + d * d == pytest.approx(1.0, abs=1e-9)


class TestDualityReport:
    def _setup(self, **kw):
        args = dict(protocol_A=alice_protocol(1.0, 2.0),
                    protocol_B=bob_protocol(1.0, 1.0),
                    separation=3.0, field=FieldParams(m=1.0),
                    meter_epsilon2=1.0)
        args.update(kw)
        return ExperimentSetup(**args)

    def test_adiabatic_spacelike_limit(self, spec):
        setup = self._setup(protocol_A=alice_protocol(1.0, 60.0),
                            separation=100.0)
        infl = compute_influence(setup, spec)
        rep = duality_report(setup, infl)
        assert infl.m_decoh == 0.0
        assert rep.visibility > 0.999
        assert rep.d_b_threshold < 0.05
        assert rep.slack >= -1e-9

    def test_zero_visibility_gives_unit_d_phi(self):
        setup = self._setup()
        infl = _infl(gamma_A=60.0)
        rep = duality_report(setup, infl)
        assert rep.d_b_phi == pytest.approx(1.0)

    def test_composed_example(self):
        # Gamma_A = ln 2, chi_bar = Sigma: slack = 1 - 1/4 - erf(1/sqrt2)^2
        eps2 = 1.0
        sigma2 = meter_distribution(_infl(gamma_B=1.0), eps2, +1).variance
        infl = _infl(gamma_A=math.log(2.0), gamma_B=1.0,
                     chi_bar_B=math.sqrt(sigma2))
        rep = duality_report(self._setup(), infl)
        expected = 1.0 - 0.25 - 0.6826894921370859 ** 2
        assert rep.slack == pytest.approx(expected, abs=1e-12)
        assert rep.slack > 0


class TestParticleNumber:
    def test_no_source(self, spec, unit_field):
        assert particle_number(zero_protocol(), unit_field, spec) == 0.0

    def test_equals_half_gamma_a(self, spec, unit_field):
        la = alice_protocol(1.4, 3.0)
        n = particle_number(la, unit_field, spec)
        g = 2.0 * keldysh_pairing(la, la, 0.0, unit_field, spec)
        assert n == pytest.approx(0.5 * g, rel=1e-6)

    def test_adiabatic_suppression(self, spec):
        fld = FieldParams(m=1.0, uv_cutoff=100.0)
        n_fast = particle_number(alice_protocol(1.0, 1.0), fld, spec)
        n_slow = particle_number(alice_protocol(1.0, 50.0), fld, spec)
        assert n_slow < 1e-3 * n_fast

    def test_massless_rejected(self, spec, massless_field):
        with pytest.raises(IRDivergenceError):
            particle_number(alice_protocol(1.0, 2.0), massless_field, spec)
