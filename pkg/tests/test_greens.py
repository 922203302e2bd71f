"""Green's functions: dispersion, retarded kernel split, mode-sum checks."""
import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from ctpfield.greens import (FieldParams, keldysh_mode_weight, omega,
                             retarded_kernel, retarded_tail)
from ctpfield.numerics import QuadratureSpec, oscillatory_tail_quad
from ctpfield.oracle import MomentumLattice, mode_sum_retarded_point


class TestDispersion:
    def test_rest_mass(self):
        assert omega(0.0, 1.0) == 1.0

    def test_pythagorean(self):
        assert omega(3.0, 4.0) == 5.0

    def test_massless(self):
        assert omega(1.0, 0.0) == 1.0

    def test_rejects_negative_momentum(self):
        with pytest.raises(ValueError):
            omega(-1.0, 1.0)


class TestKeldyshWeight:
    def test_values(self):
        assert keldysh_mode_weight(1.0, 1.0) == 0.5
        assert keldysh_mode_weight(2.0, 1.0) == 0.25

    def test_below_mass_shell_rejected(self):
        with pytest.raises(ValueError):
            keldysh_mode_weight(0.5, 1.0)
        with pytest.raises(ValueError):
            keldysh_mode_weight(1.0, 0.0)


def _mode_integral_tail(dt, r, m):
    """Independent radial mode integral for the retarded kernel at a
    timelike point, via accelerated oscillatory quadrature."""
    spec = QuadratureSpec(rel_tol=1e-10, abs_tol=1e-14)

    def f(k):
        om = np.hypot(k, m)
        return k * np.sin(k * r) * np.sin(om * dt) / om / (2 * np.pi ** 2 * r)

    period = 2 * np.pi / min(abs(dt - r), dt + r)
    res = oscillatory_tail_quad(f, 0.0, spec, period=period)
    assert not res.diverged
    return res.value


class TestRetardedKernel:
    def test_spacelike_tail_zero(self):
        assert retarded_kernel(0.5, 1.0, FieldParams(m=1.0)).tail == 0.0

    def test_massless_lightcone_only(self):
        val = retarded_kernel(2.0, 1.0, FieldParams(m=0.0))
        assert val.tail == 0.0
        assert val.delta_coefficient == pytest.approx(1.0 / (4 * np.pi))

    def test_massive_tail_value(self):
        # -(1/4pi) J1(sqrt(3))/sqrt(3); cross-checked against the radial
        # mode-integral oracle below
        val = retarded_kernel(2.0, 1.0, FieldParams(m=1.0))
        assert val.tail == pytest.approx(-0.026620752249290686, abs=1e-12)
        assert val.tail == pytest.approx(_mode_integral_tail(2.0, 1.0, 1.0),
                                         abs=1e-8)

    def test_rejects_zero_separation(self):
        with pytest.raises(ValueError):
            retarded_kernel(1.0, 0.0, FieldParams(m=1.0))

    @given(r=st.floats(0.05, 10.0), u=st.floats(0.0, 1.0),
           m=st.floats(0.0, 5.0))
    @settings(max_examples=200, deadline=None)
    def test_causality_gate(self, r, u, m):
        # exactly zero for dt <= r, not merely small
        assert retarded_tail(u * r, r, m) == 0.0

    def test_causality_thousand_points(self, rng):
        r = np.exp(rng.uniform(np.log(0.1), np.log(10), 1000))
        dt = rng.uniform(0.0, 1.0, 1000) * r
        m = rng.uniform(0.0, 5.0, 1000)
        vals = [retarded_tail(float(t), float(rr), float(mm))
                for t, rr, mm in zip(dt, r, m)]
        assert max(abs(v) for v in vals) == 0.0

    def test_reciprocity(self):
        # advanced kernel via time reversal: G_A(dt) = G_R(-dt)
        p = FieldParams(m=1.0)
        for dt, r in ((2.0, 1.0), (0.4, 1.0), (-3.0, 0.5)):
            adv_tail = retarded_tail(-dt, r, p.m)
            ret_tail = retarded_tail(dt, r, p.m)
            if dt > r:
                assert ret_tail != 0.0 and adv_tail == 0.0
            if -dt > r:
                assert adv_tail != 0.0 and ret_tail == 0.0


class TestModeSumConsistency:
    def test_tail_grid(self):
        """Smooth tail against the smeared lattice mode sum on the stated
        grid of dt/r and m*r (smearing bias removed by Richardson over two
        widths)."""
        worst = 0.0
        r = 1.0
        for dtr in (1.01, 1.5, 3.0, 10.0):
            for mr in (0.1, 1.0, 5.0):
                dt, m = dtr * r, mr / r
                # smearing must stay inside the cone gap AND short against
                # the local tail oscillation m*dt/s
                s = np.sqrt(dt * dt - r * r)
                freq = m * dt / s
                sigma = min((dt - r) / 8.0, 0.1 / max(freq, 1e-3))
                k_max = 9.5 / sigma
                shells = max(64, int(k_max * (dt + r) / (2 * np.pi)) + 64)
                lat = MomentumLattice(k_max=k_max, n_shells=shells)
                v1 = mode_sum_retarded_point(dt, r, m, lat, sigma=sigma)
                v2 = mode_sum_retarded_point(dt, r, m, lat,
                                             sigma=sigma / np.sqrt(2.0))
                orc = 2.0 * v2 - v1
                worst = max(worst, abs(retarded_tail(dt, r, m) - orc))
        assert worst < 1e-6

    def test_lattice_point_matches_tail(self):
        lat = MomentumLattice(k_max=3000.0, n_shells=2048)
        val = mode_sum_retarded_point(2.0, 1.0, 1.0, lat, sigma=0.01)
        assert val == pytest.approx(retarded_tail(2.0, 1.0, 1.0), abs=1e-5)


class TestGreenIdentity:
    def test_feynman_combination(self, rng):
        """G_F = G_K - i (G_R + G_A)/2 from one set of smeared mode sums,
        at 20 sample points."""
        lat = MomentumLattice(k_max=400.0, n_shells=1024)
        k, kw = lat.nodes()
        m = 1.0
        om = np.hypot(k, m)
        sigma = 0.05
        win = np.exp(-0.5 * (om * sigma) ** 2)
        for _ in range(20):
            r = float(rng.uniform(0.3, 2.0))
            dt = float(rng.uniform(-3.0, 3.0))
            base = kw * k * np.sin(k * r) * win / om / (2 * np.pi ** 2 * r)
            g_k = 0.5 * float(np.sum(base * np.cos(om * dt)))
            comm = float(np.sum(base * np.sin(om * dt)))
            g_r = comm if dt > 0 else 0.0
            g_a = -comm if dt < 0 else 0.0
            # Wightman W(dt) = G_K - i comm/2; G_F = theta(dt) W + theta(-dt) W*
            w_plus = g_k - 0.5j * comm
            g_f = w_plus if dt > 0 else np.conj(w_plus)
            assert abs(g_f - (g_k - 0.5j * (g_r + g_a))) < 1e-5


class TestFieldParams:
    def test_default_resolution(self):
        p = FieldParams(m=1.0).resolved(t_b=2.0, d=3.0)
        assert p.uv_cutoff == pytest.approx(1e3)
        assert p.smearing_radius == pytest.approx(0.02)

    def test_cutoff_must_exceed_mass(self):
        with pytest.raises(ValueError):
            FieldParams(m=2.0, uv_cutoff=1.0)

    def test_smearing_must_be_small(self):
        with pytest.raises(ValueError):
            FieldParams(m=1.0, uv_cutoff=100.0,
                        smearing_radius=0.5).resolved(t_b=1.0, d=1.0)
