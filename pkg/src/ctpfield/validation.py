"""Oracle-vs-closed-form battery and invariant suite.

Every closed-form quantity produced by the pipeline has exactly one
independent validator here; the ``validate`` CLI subcommand runs the full
battery and the acceptance test suite drives the same functions at their
pinned tolerances.  Tolerances can be scaled globally through the
``CTPFIELD_TOL_SCALE`` environment variable (setting it to 0 is the
harness self-test: every check must then fail).
"""
from __future__ import annotations

import math
import os
from dataclasses import dataclass

import numpy as np

from .greens import FieldParams, retarded_tail
from .influence import (DivergentFunctionalError, ExperimentSetup,
                        InfluenceFunctional, compute_influence,
                        keldysh_pairing, retarded_pairing)
from .numerics import QuadratureSpec
from .observables import (duality_report, meter_distribution,
                          optimal_epsilon, overlap, particle_number)
from .oracle import (MomentumLattice, double_time_retarded, lattice_pairing,
                     meter_moment_oracle, mode_sum_retarded_point,
                     pi_integral_overlap)
from .protocols import alice_protocol, bob_protocol

__all__ = ["CheckResult", "run_validation", "CHECK_NAMES"]


@dataclass
class CheckResult:
    name: str
    tolerance: float
    observed: float
    passed: bool
    detail: str = ""

    def line(self):
        status = "PASS" if self.passed else "FAIL"
        return (f"{status} {self.name}: observed {self.observed:.3e} "
                f"(tolerance {self.tolerance:.3e}) {self.detail}")


def tol_scale() -> float:
    return float(os.environ.get("CTPFIELD_TOL_SCALE", "1.0"))


def _result(name, observed, tolerance, detail=""):
    tol = tolerance * tol_scale()
    return CheckResult(name=name, tolerance=tol, observed=float(observed),
                       passed=bool(observed <= tol), detail=detail)


def _spec():
    return QuadratureSpec()


# ---------------------------------------------------------------------------
# 1. causality of the retarded kernel

def _spacelike_points(rng, n):
    r = np.exp(rng.uniform(np.log(0.3), np.log(3.0), n))
    dt = rng.uniform(0.0, 0.9, n) * r
    m = rng.uniform(0.0, 3.0, n)
    return dt, r, m


def check_causality_exact(rng, n_points=1000):
    dt, r, m = _spacelike_points(rng, n_points)
    worst = max(abs(retarded_tail(float(t), float(rr), float(mm)))
                for t, rr, mm in zip(dt, r, m))
    return _result("causal_tail_exact_zero", worst, 0.0,
                   f"over {n_points} random spacelike points")


def check_causality_lattice(rng, n_points=1000):
    dt, r, m = _spacelike_points(rng, n_points)
    worst = 0.0
    for t, rr, mm in zip(dt, r, m):
        gap = rr - t
        sigma = gap / 7.0
        k_max = 8.0 / sigma
        n_osc = k_max * (rr + t) / (2.0 * np.pi)
        shells = max(64, int(np.ceil(n_osc / 2.0)) + 32)
        lat = MomentumLattice(k_max=k_max, n_shells=shells)
        worst = max(worst, abs(mode_sum_retarded_point(
            float(t), float(rr), float(mm), lat, sigma=sigma)))
    return _result("causal_lattice_residual", worst, 1e-6,
                   f"over {n_points} random spacelike points")


def check_causality_refinement():
    """Doubling the shell count must at least halve the causal residual
    while the lattice is still under-resolved."""
    dt, r, m = 0.5, 1.0, 1.0
    sigma = 0.01
    k_max = 8.0 / sigma
    residuals = []
    for shells in (64, 128, 256):
        lat = MomentumLattice(k_max=k_max, n_shells=shells)
        residuals.append(abs(mode_sum_retarded_point(dt, r, m, lat,
                                                     sigma=sigma)))
    ratios = [residuals[i + 1] / residuals[i] for i in range(2)]
    return _result("causal_refinement_order", max(ratios), 0.5,
                   f"residuals {['%.2e' % x for x in residuals]}")


# ---------------------------------------------------------------------------
# 2. support of the measurement back-action M

def check_m_support():
    spec = _spec()
    fld = FieldParams(m=1.0, uv_cutoff=100.0, smearing_radius=0.01)
    t_a, t_b = 2.0, 1.0
    la = alice_protocol(1.0, t_a)
    lb = bob_protocol(1.0, t_b)
    bad = 0.0
    detail = []
    for d in np.linspace(0.4, 4.0, 19):
        m_val = -2.0 * retarded_pairing(la, lb, float(d), fld, spec)
        if t_a <= d:
            bad = max(bad, abs(m_val))  # must be exactly zero
        elif not abs(m_val) > 0:
            bad = max(bad, 1.0)
            detail.append(f"M vanished at d={d}")
    return _result("m_decoh_causal_support", bad, 0.0,
                   "; ".join(detail) or "exact zero outside the cone, "
                   "nonzero inside")


# ---------------------------------------------------------------------------
# 3/4. Gamma_A against the lattice oracle and its adiabatic decay

def check_gamma_a_lattice(t_a_values=(1.0, 5.0, 10.0)):
    spec = _spec()
    worst = 0.0
    details = []
    for t_a in t_a_values:
        fld = FieldParams(m=1.0, uv_cutoff=150.0, smearing_radius=0.01)
        la = alice_protocol(1.0, t_a)
        closed = 2.0 * keldysh_pairing(la, la, 0.0, fld, spec)
        lat = MomentumLattice(k_max=150.0, n_shells=512)
        orc = lattice_pairing("keldysh", la, la, 0.0, fld, lat)
        rel = abs(closed - 2.0 * orc.value) / abs(2.0 * orc.value)
        worst = max(worst, rel)
        details.append(f"t_A={t_a}: rel {rel:.2e}")
    return _result("gamma_a_vs_lattice", worst, 1e-3, "; ".join(details))


def check_adiabatic_decay():
    spec = _spec()
    fld = FieldParams(m=1.0, uv_cutoff=100.0, smearing_radius=0.01)
    t_grid = np.geomspace(20.0, 100.0, 9)
    gammas = []
    for t_a in t_grid:
        la = alice_protocol(1.0, float(t_a))
        gammas.append(2.0 * keldysh_pairing(la, la, 0.0, fld, spec))
    slope, intercept = np.polyfit(np.log(t_grid), np.log(gammas), 1)
    prefactor = math.exp(intercept)
    target = 1.0 / (3.0 * np.pi ** 2)
    slope_err = abs(slope + 2.0)
    pref_err = abs(prefactor - target) / target
    r1 = _result("adiabatic_slope", slope_err, 0.1, f"slope {slope:.4f}")
    r2 = _result("adiabatic_prefactor", pref_err, 0.10,
                 f"prefactor {prefactor:.5f} vs {target:.5f}")
    return [r1, r2]


# ---------------------------------------------------------------------------
# 5. created particle number

def check_particle_number():
    spec = _spec()
    worst = 0.0
    for m, t_a in ((1.0, 2.0), (0.5, 5.0), (2.0, 1.0)):
        fld = FieldParams(m=m, uv_cutoff=200.0 * max(m, 1.0),
                          smearing_radius=0.01)
        la = alice_protocol(1.3, t_a)
        n = particle_number(la, fld, spec)
        g = 2.0 * keldysh_pairing(la, la, 0.0, fld, spec)
        worst = max(worst, abs(n - 0.5 * g) / (0.5 * g))
    return _result("particle_number_identity", worst, 1e-6)


# ---------------------------------------------------------------------------
# 6. overlap closed form against the meter-momentum integral

def _synthetic_influence(gamma_a=0.0, gamma_b=0.0, g_r_bb=0.0,
                         chi_bar_b=0.0, m_decoh=0.0):
    return InfluenceFunctional(gamma_A=gamma_a, gamma_B=gamma_b,
                               gamma_AB=0.0, g_R_BB=g_r_bb,
                               chi_bar_B=chi_bar_b, m_decoh=m_decoh)


def check_overlap_oracle(rng, n_trials=100):
    worst = 0.0
    for _ in range(n_trials):
        gamma_a = rng.uniform(0.0, 5.0)
        m_val = rng.uniform(-5.0, 5.0)
        eps2 = rng.uniform(0.1, 10.0)
        infl = _synthetic_influence(gamma_a=gamma_a, m_decoh=m_val)
        closed = overlap(infl, eps2)
        numeric = pi_integral_overlap(infl, eps2)
        worst = max(worst, abs(closed - numeric))
    return _result("overlap_vs_pi_integral", worst, 1e-8,
                   f"{n_trials} random (Gamma_A, M, eps2) triples")


# ---------------------------------------------------------------------------
# 7. conditional meter statistics

def check_meter_moments(rng, n_trials=12):
    worst_norm = 0.0
    worst_mean = 0.0
    worst_var = 0.0
    for _ in range(n_trials):
        infl = _synthetic_influence(gamma_b=rng.uniform(0.0, 3.0),
                                    g_r_bb=rng.uniform(-2.0, 2.0),
                                    chi_bar_b=rng.uniform(-3.0, 3.0))
        eps2 = rng.uniform(0.2, 5.0)
        spin = 1 if rng.uniform() < 0.5 else -1
        dist = meter_distribution(infl, eps2, spin)
        m0 = meter_moment_oracle(infl, eps2, spin, 0)
        m1 = meter_moment_oracle(infl, eps2, spin, 1)
        m2 = meter_moment_oracle(infl, eps2, spin, 2)
        worst_norm = max(worst_norm, abs(m0 - 1.0))
        scale = max(abs(dist.mean), math.sqrt(dist.variance))
        worst_mean = max(worst_mean, abs(m1 - dist.mean) / scale)
        worst_var = max(worst_var, abs(m2 - dist.variance) / dist.variance)
    return [
        _result("meter_normalization", worst_norm, 1e-10),
        _result("meter_mean", worst_mean, 1e-6),
        _result("meter_variance", worst_var, 1e-6),
    ]


# ---------------------------------------------------------------------------
# 8. optimal meter variance

def check_optimal_meter(rng, n_trials=8):
    worst_argmin = 0.0
    worst_identity = 0.0
    for _ in range(n_trials):
        infl = _synthetic_influence(gamma_b=rng.uniform(0.0, 3.0),
                                    g_r_bb=rng.uniform(0.1, 4.0)
                                    * (1 if rng.uniform() < 0.5 else -1))
        opt = optimal_epsilon(infl)
        grid = np.geomspace(opt.eps2_opt / 30.0, opt.eps2_opt * 30.0, 4001)
        sig2 = [meter_distribution(infl, float(e), +1).variance for e in grid]
        argmin = grid[int(np.argmin(sig2))]
        worst_argmin = max(worst_argmin,
                           abs(argmin - opt.eps2_opt) / opt.eps2_opt)
        sigma2_at_opt = meter_distribution(infl, opt.eps2_opt, +1).variance
        worst_identity = max(worst_identity,
                             abs(sigma2_at_opt - opt.sigma2_opt))
    return [
        _result("optimal_eps2_argmin", worst_argmin, 0.01),
        _result("optimal_sigma2_identity", worst_identity, 1e-9),
    ]


# ---------------------------------------------------------------------------
# 9. wave-particle duality sweep

def random_setup(rng) -> ExperimentSetup:
    m = rng.uniform(0.3, 3.0)
    t_a = np.exp(rng.uniform(np.log(0.3), np.log(20.0)))
    t_b = np.exp(rng.uniform(np.log(0.3), np.log(10.0)))
    d = np.exp(rng.uniform(np.log(0.2), np.log(20.0)))
    lam0 = rng.uniform(0.2, 2.0)
    alpha = rng.uniform(0.2, 2.0)
    eps2 = np.exp(rng.uniform(np.log(0.05), np.log(20.0)))
    fld = FieldParams(m=m, uv_cutoff=200.0 * max(m, 1.0 / t_b),
                      smearing_radius=1e-2 * min(d, t_b))
    return ExperimentSetup(protocol_A=alice_protocol(lam0, t_a),
                           protocol_B=bob_protocol(alpha, t_b),
                           separation=d, field=fld, meter_epsilon2=eps2)


def check_duality_sweep(rng, n_points=1000):
    spec = QuadratureSpec(rel_tol=1e-7, abs_tol=1e-12)
    min_slack = np.inf
    worst_chain = -np.inf
    for _ in range(n_points):
        setup = random_setup(rng)
        infl = compute_influence(setup, spec, diagnostics=False)
        rep = duality_report(setup, infl)
        min_slack = min(min_slack, rep.slack)
        worst_chain = max(worst_chain, rep.d_b_threshold - rep.d_b_phi)
    return [
        _result("duality_slack", max(0.0, -min_slack), 1e-9,
                f"min slack {min_slack:.3e} over {n_points} setups"),
        _result("duality_chain", max(0.0, worst_chain), 1e-9,
                "D_B(threshold) <= D_B(field+meter)"),
    ]


# ---------------------------------------------------------------------------
# 10. massless retarded closed forms

def check_massless_closed_forms():
    spec = _spec()
    fld = FieldParams(m=0.0, uv_cutoff=100.0, smearing_radius=0.01)
    worst_chi = 0.0
    for d in (1.5, 3.0):
        alpha, lam0, t_b = 1.2, 0.8, 1.0
        chi = retarded_pairing(bob_protocol(alpha, t_b),
                               alice_protocol(lam0, 5.0), d, fld, spec)
        target = alpha * lam0 * t_b / (4.0 * np.pi * d)
        worst_chi = max(worst_chi, abs(chi - target))
    r1 = _result("massless_chi_bar", worst_chi, 1e-10,
                 "plateau seen across the light cone")

    la = alice_protocol(1.0, 2.0)
    lb = bob_protocol(1.0, 2.0)
    m_closed = -2.0 * retarded_pairing(la, lb, 1.0, fld, spec)
    hand = -0.25 / (2.0 * np.pi)
    oracle_val = -2.0 * double_time_retarded(la, lb, 1.0, fld, spec)
    r2 = _result("massless_m_hand_value", abs(m_closed - hand), 1e-10,
                 f"M = {m_closed:.10f}")
    r3 = _result("massless_m_vs_2d_quadrature", abs(m_closed - oracle_val),
                 1e-8)
    return [r1, r2, r3]


# ---------------------------------------------------------------------------
# 11. divergence diagnostics

def check_gamma_b_uv_slope():
    spec = _spec()
    alpha, t_b = 1.3, 1.0
    lb = bob_protocol(alpha, t_b)
    cuts = np.geomspace(1e2, 1e4, 13)
    vals = []
    for cut in cuts:
        fld = FieldParams(m=0.0, uv_cutoff=float(cut), smearing_radius=0.01)
        vals.append(2.0 * keldysh_pairing(lb, lb, 0.0, fld, spec))
    slope = np.polyfit(np.log(cuts), vals, 1)[0]
    target = alpha ** 2 / np.pi ** 2
    return _result("gamma_b_log_slope", abs(slope - target) / target, 0.02,
                   f"fitted {slope:.6f} vs {target:.6f}")


def check_massless_gamma_a_rejected():
    fld = FieldParams(m=0.0, uv_cutoff=100.0, smearing_radius=0.01)
    setup = ExperimentSetup(protocol_A=alice_protocol(1.0, 2.0),
                            protocol_B=bob_protocol(1.0, 1.0),
                            separation=3.0, field=fld, meter_epsilon2=1.0)
    try:
        compute_influence(setup, _spec())
    except DivergentFunctionalError as exc:
        ok = exc.functional == "gamma_A" and "IR" in str(exc.cause.__class__.__name__)
        return _result("massless_gamma_a_named_error", 0.0 if ok else 1.0,
                       0.0, f"raised for {exc.functional}")
    return _result("massless_gamma_a_named_error", 1.0, 0.0,
                   "no divergence error raised")


# ---------------------------------------------------------------------------
# 12. six-functional oracle equivalence

def equivalence_setups():
    out = []
    for t_a in (1.0, 5.0):
        for d in (0.5, 3.0):
            out.append((t_a, 1.0, d))
    return out


def check_oracle_equivalence():
    spec = _spec()
    fld = FieldParams(m=1.0, uv_cutoff=60.0, smearing_radius=0.05)
    t_b = 1.0
    lb = bob_protocol(1.0, t_b)
    protos = {t_a: alice_protocol(1.0, t_a) for t_a in (1.0, 5.0)}
    kel_lat = MomentumLattice(k_max=60.0, n_shells=256)
    ret_lat = MomentumLattice(k_max=1600.0, n_shells=1024)

    cases = [("gamma_B", "keldysh", lb, lb, 0.0, 2.0, kel_lat),
             ("g_R_BB", "retarded", lb, lb, 0.05, 1.0, ret_lat)]
    for t_a, la in protos.items():
        cases.append((f"gamma_A[t_A={t_a}]", "keldysh", la, la, 0.0, 2.0,
                      kel_lat))
        for d in (0.5, 3.0):
            cases.append((f"gamma_AB[t_A={t_a},d={d}]", "keldysh", la, lb, d,
                          -2.0, kel_lat))
            cases.append((f"chi_bar_B[t_A={t_a},d={d}]", "retarded", lb, la,
                          d, 1.0, ret_lat))
            cases.append((f"m_decoh[t_A={t_a},d={d}]", "retarded", la, lb, d,
                          -2.0, ret_lat))

    worst = 0.0
    worst_name = ""
    for name, kind, f, g, r, fac, lat in cases:
        if kind == "keldysh":
            closed = fac * keldysh_pairing(f, g, r, fld, spec)
        else:
            closed = fac * retarded_pairing(f, g, r, fld, spec)
        lat_val = fac * lattice_pairing(kind, f, g, r, fld, lat).value
        spacelike_zero = (kind == "retarded" and fac == -2.0
                          and f.support_end <= r)
        if spacelike_zero:
            rel = 0.0 if (closed == 0.0 and abs(lat_val) < 1e-6) else 1.0
        else:
            rel = abs(closed - lat_val) / max(abs(lat_val), 1e-9)
        if rel > worst:
            worst, worst_name = rel, name
    return _result("oracle_equivalence_six", worst, 1e-3,
                   f"worst case {worst_name}")


# ---------------------------------------------------------------------------

def _as_list(x):
    return x if isinstance(x, list) else [x]


_GROUPS = (
    ("causality", lambda rng, q: (_as_list(check_causality_exact(rng, 100 if q else 1000))
                                  + _as_list(check_causality_lattice(rng, 100 if q else 1000))
                                  + _as_list(check_causality_refinement()))),
    ("m_support", lambda rng, q: _as_list(check_m_support())),
    ("gamma_a_lattice", lambda rng, q: _as_list(check_gamma_a_lattice())),
    ("adiabatic", lambda rng, q: check_adiabatic_decay()),
    ("particle_number", lambda rng, q: _as_list(check_particle_number())),
    ("overlap", lambda rng, q: _as_list(check_overlap_oracle(rng, 20 if q else 100))),
    ("meter", lambda rng, q: check_meter_moments(rng)),
    ("optimal_meter", lambda rng, q: check_optimal_meter(rng)),
    ("duality", lambda rng, q: check_duality_sweep(rng, 60 if q else 1000)),
    ("massless", lambda rng, q: check_massless_closed_forms()),
    ("uv_ir", lambda rng, q: (_as_list(check_gamma_b_uv_slope())
                              + _as_list(check_massless_gamma_a_rejected()))),
    ("equivalence", lambda rng, q: _as_list(check_oracle_equivalence())),
)


def run_validation(seed=0, quick=False, only=None):
    """Full battery.  ``quick`` trims the randomised sample counts (smoke
    runs; acceptance always uses the full counts).  ``only`` restricts the
    run to the named groups; the CTPFIELD_VALIDATE_ONLY environment
    variable (comma-separated) does the same for the CLI."""
    if only is None:
        env = os.environ.get("CTPFIELD_VALIDATE_ONLY", "").strip()
        only = [s for s in env.split(",") if s] or None
    rng = np.random.default_rng(seed)
    results = []
    for name, fn in _GROUPS:
        if only is not None and name not in only:
            continue
        results.extend(fn(rng, quick))
    return results


CHECK_NAMES = [
    "causal_tail_exact_zero", "causal_lattice_residual",
    "causal_refinement_order", "m_decoh_causal_support",
    "gamma_a_vs_lattice", "adiabatic_slope", "adiabatic_prefactor",
    "particle_number_identity", "overlap_vs_pi_integral",
    "meter_normalization", "meter_mean", "meter_variance",
    "optimal_eps2_argmin", "optimal_sigma2_identity",
    "duality_slack", "duality_chain",
    "massless_chi_bar", "massless_m_hand_value",
    "massless_m_vs_2d_quadrature",
    "gamma_b_log_slope", "massless_gamma_a_named_error",
    "oracle_equivalence_six",
]
