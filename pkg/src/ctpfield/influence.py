"""The six pairing functionals and the explicit influence functional.

Every pairing is a double time integral of two coupling protocols against
a vacuum kernel.  Keldysh pairings are reduced exactly to one radial mode
integral,

    int int f G_K g = (1/2 pi^2) int_0^Lambda dk k^2 sinc(k r)
                      Re[F(w_k) conj(G(w_k))] / (2 w_k),

with F, G the closed-form protocol transforms.  Retarded pairings are
reduced exactly to one lag integral against the split position kernel,

    int int f G_R g = X(r)/(4 pi r) + int_{tau > r} tail(tau, r) X(tau) dtau,

where X(tau) = int dt f(t) g(t - tau) is the exact cross-correlation of
the protocols; the light-cone delta is consumed analytically and never
quadratured.

Divergences are first-class: the plateau protocol makes Keldysh
self-pairings IR log-divergent at m = 0 (rejected with a named error),
and sharp rectangle edges make the meter self-pairing UV log-divergent
(computed at the configured cutoff, with the fitted log slope attached as
a diagnostic rather than silently returned).
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field as dataclass_field, replace
from typing import NamedTuple

import numpy as np

from . import _core
from .greens import FieldParams, retarded_tail
from .numerics import (QuadratureSpec, adaptive_quad, oscillation_presplit,
                       oscillatory_tail_quad)
from .protocols import CouplingProtocol, cross_correlation

__all__ = [
    "ExperimentSetup",
    "InfluenceFunctional",
    "KeldyshBranchIndices",
    "DivergenceError",
    "IRDivergenceError",
    "UVDivergenceError",
    "DivergentFunctionalError",
    "keldysh_pairing",
    "retarded_pairing",
    "compute_influence",
    "iW_value",
    "FUNCTIONAL_NAMES",
]

FUNCTIONAL_NAMES = ("gamma_A", "gamma_B", "gamma_AB", "g_R_BB",
                    "chi_bar_B", "m_decoh")


class DivergenceError(RuntimeError):
    """A requested pairing is divergent under the configured protocol."""


class IRDivergenceError(DivergenceError):
    pass


class UVDivergenceError(DivergenceError):
    pass


class DivergentFunctionalError(DivergenceError):
    def __init__(self, functional, cause):
        super().__init__(f"{functional}: {cause}")
        self.functional = functional
        self.cause = cause


@dataclass(frozen=True)
class ExperimentSetup:
    """Full configuration of the two-detector experiment."""

    protocol_A: CouplingProtocol
    protocol_B: CouplingProtocol
    separation: float
    field: FieldParams
    meter_epsilon2: float

    def __post_init__(self):
        if not self.separation > 0:
            raise ValueError("detector separation must be positive")
        if not self.meter_epsilon2 > 0:
            raise ValueError("meter variance must be positive")
        if not self.protocol_A.is_zero and not self.protocol_A.has_plateau:
            raise ValueError("the spin-source protocol must carry the past plateau")
        if self.protocol_B.has_plateau:
            raise ValueError("the meter protocol must not have a plateau")

    def resolved_field(self) -> FieldParams:
        if self.protocol_B.is_zero:
            # no meter time scale: fall back to the mass (or unit) scale
            cut = self.field.uv_cutoff or 1e3 * max(self.field.m, 1.0)
            rs = self.field.smearing_radius or 1e-2 * self.separation
            return replace(self.field, uv_cutoff=cut, smearing_radius=rs)
        return self.field.resolved(t_b=self.protocol_B.support_end,
                                   d=self.separation)


@dataclass(frozen=True)
class InfluenceFunctional:
    """The six real pairing scalars, with per-field quadrature error
    estimates and divergence diagnostics attached."""

    gamma_A: float
    gamma_B: float
    gamma_AB: float
    g_R_BB: float
    chi_bar_B: float
    m_decoh: float
    error_estimates: dict = dataclass_field(default_factory=dict, compare=False)
    diagnostics: dict = dataclass_field(default_factory=dict, compare=False)

    def __post_init__(self):
        for name in ("gamma_A", "gamma_B"):
            v = getattr(self, name)
            if v is not None and v < -1e-12:
                raise ValueError(f"{name} must be non-negative, got {v}")

    def as_dict(self):
        return {name: getattr(self, name) for name in FUNCTIONAL_NAMES}


@dataclass(frozen=True)
class KeldyshBranchIndices:
    """Spin and meter-momentum combinations in the r/a branch basis."""

    s_r: float
    s_a: float
    Pi_r: float
    Pi_a: float

    def __post_init__(self):
        if self.s_r not in (-1.0, 0.0, 1.0) or self.s_a not in (-2.0, 0.0, 2.0):
            raise ValueError("spin-1/2 branch pairs require s_r in {-1,0,1} "
                             "and s_a in {-2,0,2}")

    @classmethod
    def from_branches(cls, s1, s2, Pi1, Pi2):
        return cls(s_r=(s1 + s2) / 2.0, s_a=float(s1 - s2),
                   Pi_r=(Pi1 + Pi2) / 2.0, Pi_a=float(Pi1 - Pi2))


class PairingDetail(NamedTuple):
    value: float
    error: float
    diagnostics: dict


def _keldysh_detail(f, g, r, field: FieldParams, spec: QuadratureSpec,
                    uv_diagnostics=False) -> PairingDetail:
    if f.is_zero or g.is_zero:
        return PairingDetail(0.0, 0.0, {})
    m = field.m
    if m == 0.0 and (f.has_plateau or g.has_plateau):
        raise IRDivergenceError(
            "Keldysh pairing of a plateau protocol is IR log-divergent at "
            "m = 0; the mode integral behaves like dk/k near k = 0")
    cut = field.uv_cutoff
    if cut is None:
        raise ValueError("field.uv_cutoff must be resolved before pairing")
    fd = _core.descriptor(f)
    gd = _core.descriptor(g)

    def integrand(k):
        return _core.keldysh_integrand(k, m, r, fd, gd)

    t_scale = max(f.support_end - min(f.finite_start, 0.0),
                  g.support_end - min(g.finite_start, 0.0)) + r
    period = 2.0 * np.pi / max(t_scale, 1e-30)
    width = spec.oscillatory_periods_per_panel * period
    # keep the presplit within half the subdivision budget; the adaptive
    # loop spends the rest where the error estimator asks for it
    min_width = cut / max(spec.max_subdivisions // 2, 8)
    width = max(width, min_width)
    blocks = [cut / 4.0, cut / 2.0, cut]
    lo = 0.0
    results = []
    for hi in blocks:
        pts = np.arange(lo + width, hi, width)
        results.append(adaptive_quad(integrand, lo, hi, spec, points=pts))
        lo = hi
    total = sum(rr.value for rr in results)
    err = sum(rr.error for rr in results)
    diag = {}
    if uv_diagnostics:
        b1, b2 = results[1].value, results[2].value
        diag["uv_cutoff"] = cut
        diag["uv_tail_blocks"] = (b1, b2)
        if abs(b2) > 2.0 * abs(b1) + 10 * spec.abs_tol:
            raise UVDivergenceError(
                f"mode integral grows beyond log with the cutoff: dyadic "
                f"blocks {b1!r} -> {b2!r}")
        if abs(b1) > 10 * spec.abs_tol and 0.5 < abs(b2 / b1) < 2.0:
            # log-divergent signature: equal dyadic block contributions
            diag["uv_log_slope"] = b2 / math.log(2.0)
    return PairingDetail(total, err, diag)


def keldysh_pairing(f, g, r, field: FieldParams,
                    spec: QuadratureSpec | None = None) -> float:
    """int int f(t) G_K(t - t', r) g(t') dt dt' as a radial mode integral."""
    return _keldysh_detail(f, g, r, field, spec or QuadratureSpec()).value


def _retarded_support_empty(f, g, r):
    """True when f(t) g(t - tau) vanishes identically for all tau >= r."""
    if f.is_zero or g.is_zero:
        return True
    if g.has_plateau:
        return False  # the plateau keeps X(tau) nonzero for arbitrarily late lags
    return f.support_end - g.finite_start <= r


def _retarded_detail(f, g, r, field: FieldParams, spec: QuadratureSpec,
                     sensitivity=False) -> PairingDetail:
    if not r > 0:
        raise ValueError("retarded pairing needs r > 0; self-pairings must "
                         "substitute the smearing radius")
    if _retarded_support_empty(f, g, r):
        return PairingDetail(0.0, 0.0, {"causal_support": "empty"})
    m = field.m

    value = cross_correlation(f, g, r) / (4.0 * np.pi * r)
    err = abs(value) * 1e-15
    diag = {}

    if m > 0.0:
        period = 2.0 * np.pi / m
        # lag window over which X(tau) still varies
        g_lo = g.finite_start
        tau_hi = f.support_end - g_lo
        kinks = sorted({b - c for b in f.breakpoints for c in g.breakpoints
                        if r < b - c < tau_hi})
        if tau_hi > r:
            pts = np.concatenate([np.asarray(kinks),
                                  oscillation_presplit(r, tau_hi, period, spec)])

            def tail_integrand(tau):
                x = np.array([cross_correlation(f, g, ti) for ti in tau])
                return retarded_tail(tau, r, m) * x

            res = adaptive_quad(tail_integrand, r, tau_hi, spec,
                                points=np.unique(pts))
            value += res.value
            err += res.error
        if g.has_plateau:
            # beyond tau_hi the correlation is constant: plateau value times
            # the integral of f; the remaining tail is a semi-infinite
            # oscillatory integral of the Bessel tail alone
            x_inf = g.past_plateau * _protocol_integral(f)
            if x_inf != 0.0:
                start = max(tau_hi, r)
                tail = oscillatory_tail_quad(
                    lambda tau: retarded_tail(tau, r, m), start, spec,
                    period=period)
                if tail.diverged:
                    raise DivergenceError("retarded plateau tail failed to "
                                          "converge")
                value += x_inf * tail.value
                err += abs(x_inf) * tail.error
    if sensitivity:
        up = _retarded_detail(f, g, 2.0 * r, field, spec).value
        dn = _retarded_detail(f, g, 0.5 * r, field, spec).value
        diag["dlog_r_sensitivity"] = (up - dn) / math.log(4.0)
        diag["smearing_radius"] = r
    return PairingDetail(value, err, diag)


def _protocol_integral(p: CouplingProtocol) -> float:
    """Exact integral of the finite part of a protocol."""
    return sum(0.5 * (t1 - t0) * (v0 + v1) for t0, t1, v0, v1 in p.segments)


def retarded_pairing(f, g, r, field: FieldParams,
                     spec: QuadratureSpec | None = None) -> float:
    """int int f(t) G_R(t - t', r) g(t') dt dt' via the split kernel.

    Exactly zero (no quadrature) whenever the support of f and the support
    of g shifted by r do not overlap.
    """
    return _retarded_detail(f, g, r, field, spec or QuadratureSpec()).value


def compute_influence(setup: ExperimentSetup,
                      spec: QuadratureSpec | None = None,
                      include=None,
                      diagnostics=True) -> InfluenceFunctional:
    """Assemble the influence functional for an experiment.

    ``include`` restricts the computed functionals (useful for massless
    runs where the Keldysh spin-source pairings are IR-divergent); omitted
    functionals are reported as None.  Divergences are re-raised naming
    the offending functional.
    """
    spec = spec or QuadratureSpec()
    names = set(FUNCTIONAL_NAMES if include is None else include)
    unknown = names - set(FUNCTIONAL_NAMES)
    if unknown:
        raise ValueError(f"unknown functionals requested: {sorted(unknown)}")
    fld = setup.resolved_field()
    la, lb, d = setup.protocol_A, setup.protocol_B, setup.separation
    values = {}
    errors = {}
    diags = {}

    def run(name, func):
        if name not in names:
            values[name] = None
            return
        try:
            detail = func()
        except DivergenceError as exc:
            raise DivergentFunctionalError(name, exc) from exc
        values[name] = detail.value
        errors[name] = detail.error
        if detail.diagnostics:
            diags[name] = detail.diagnostics

    def scaled(factor, detail):
        return PairingDetail(factor * detail.value + 0.0,  # drop -0.0
                             abs(factor) * detail.error, detail.diagnostics)

    run("gamma_A", lambda: scaled(2.0, _keldysh_detail(la, la, 0.0, fld, spec)))
    run("gamma_B", lambda: scaled(2.0, _keldysh_detail(
        lb, lb, 0.0, fld, spec, uv_diagnostics=diagnostics)))
    run("gamma_AB", lambda: scaled(-2.0, _keldysh_detail(la, lb, d, fld, spec)))
    run("g_R_BB", lambda: _retarded_detail(
        lb, lb, fld.smearing_radius, fld, spec, sensitivity=diagnostics))
    run("chi_bar_B", lambda: _retarded_detail(lb, la, d, fld, spec))
    run("m_decoh", lambda: scaled(-2.0, _retarded_detail(la, lb, d, fld, spec)))

    if "gamma_B" in diags and "uv_log_slope" in diags["gamma_B"]:
        diags["gamma_B"]["uv_log_slope"] *= 2.0  # pairing -> Gamma_B scale

    return InfluenceFunctional(error_estimates=errors, diagnostics=diags,
                               **values)


def iW_value(idx: KeldyshBranchIndices, infl: InfluenceFunctional) -> complex:
    """Explicit influence functional for one pair of branch indices:

    iW = -(s_a^2/4) G_A - (Pi_a^2/4) G_B - (Pi_a s_a/2) G_AB
         + i Pi_a Pi_r gR_BB - i Pi_a s_r chi_B + i (Pi_r s_a/2) M

    No pairing of two "a" currents appears: G_aa = 0 by construction, and
    the diagonal branch (s_a = Pi_a = 0) gives iW = 0 identically
    (unitarity).
    """
    for name in FUNCTIONAL_NAMES:
        if getattr(infl, name) is None:
            raise ValueError(f"iW needs all six functionals; {name} missing")
    sa, sr, pa, pr = idx.s_a, idx.s_r, idx.Pi_a, idx.Pi_r
    real = (-(sa * sa / 4.0) * infl.gamma_A
            - (pa * pa / 4.0) * infl.gamma_B
            - (pa * sa / 2.0) * infl.gamma_AB)
    imag = (pa * pr * infl.g_R_BB
            - pa * sr * infl.chi_bar_B
            + (pr * sa / 2.0) * infl.m_decoh)
    return complex(real, imag)
