"""Physical outputs derived from an influence functional.

All operations here are cheap algebra over a precomputed
:class:`~ctpfield.influence.InfluenceFunctional`; no observable re-runs
quadrature, which keeps parameter sweeps fast.  The one exception is
``particle_number``, which deliberately re-derives the created-particle
count from its own mode integral (in the frequency variable rather than
the momentum variable) so that the identity <n> = Gamma_A / 2 is an
actual cross-check and not a tautology.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from . import _core
from .greens import FieldParams
from .influence import (ExperimentSetup, InfluenceFunctional,
                        IRDivergenceError)
from .numerics import QuadratureSpec, adaptive_quad, erf_fn

__all__ = [
    "GaussianDistribution",
    "DualityReport",
    "OptimalMeter",
    "overlap",
    "meter_distribution",
    "optimal_epsilon",
    "distinguishability_threshold",
    "duality_report",
    "particle_number",
    "two_level_trace_distance",
]


@dataclass(frozen=True)
class GaussianDistribution:
    """Normalised Gaussian, as produced for the conditional meter value."""

    mean: float
    variance: float

    def __post_init__(self):
        if not self.variance > 0:
            raise ValueError("variance must be positive")

    def pdf(self, x):
        x = np.asarray(x, dtype=float)
        return (np.exp(-0.5 * (x - self.mean) ** 2 / self.variance)
                / np.sqrt(2.0 * np.pi * self.variance))


@dataclass(frozen=True)
class DualityReport:
    visibility: float        # v
    d_b_threshold: float     # threshold-projector distinguishability
    d_b_phi: float           # full field-plus-meter distinguishability
    slack: float             # 1 - v^2 - d_b_threshold^2
    n_created: float         # created particle number, Gamma_A / 2
    sigma_x: float
    sigma_y: float


class OptimalMeter(NamedTuple):
    eps2_opt: float
    sigma2_opt: float
    degenerate: bool  # True at the boundary gR_BB = 0 where eps2_opt -> 0


def overlap(infl: InfluenceFunctional, eps2) -> complex:
    """Spin-off-diagonal overlap e^{-Gamma_A} exp(-M^2 / 4 eps^2).

    The real part is <sigma_x>, minus the imaginary part is <sigma_y>
    (identically zero here: both decoherence factors are real).
    """
    if not eps2 > 0:
        raise ValueError("meter variance must be positive")
    return complex(math.exp(-infl.gamma_A)
                   * math.exp(-infl.m_decoh ** 2 / (4.0 * eps2)))


def meter_distribution(infl: InfluenceFunctional, eps2,
                       spin) -> GaussianDistribution:
    """Conditional meter-value distribution P^(spin) for spin = +1 or -1."""
    if spin not in (1, -1, 1.0, -1.0):
        raise ValueError("spin must be +1 or -1")
    if not eps2 > 0:
        raise ValueError("meter variance must be positive")
    sigma2 = (infl.g_R_BB ** 2 / (2.0 * eps2)
              + 0.5 * (infl.gamma_B + eps2))
    return GaussianDistribution(mean=spin * infl.chi_bar_B, variance=sigma2)


def optimal_epsilon(infl: InfluenceFunctional) -> OptimalMeter:
    """Meter variance minimising the measurement uncertainty:
    eps^2 = |gR_BB|, where Sigma^2 = |gR_BB| + Gamma_B / 2."""
    g = abs(infl.g_R_BB)
    return OptimalMeter(eps2_opt=g, sigma2_opt=g + 0.5 * infl.gamma_B,
                        degenerate=(g == 0.0))


def distinguishability_threshold(infl: InfluenceFunctional, eps2) -> float:
    """|erf(chi_B / (sqrt(2) Sigma))|: the trace distance of the two
    conditional meter distributions under the optimal threshold projector."""
    sigma2 = meter_distribution(infl, eps2, +1).variance
    return abs(float(erf_fn(infl.chi_bar_B / math.sqrt(2.0 * sigma2))))


def duality_report(setup: ExperimentSetup,
                   infl: InfluenceFunctional) -> DualityReport:
    """Assemble visibility, distinguishabilities and the duality slack."""
    eps2 = setup.meter_epsilon2
    ov = overlap(infl, eps2)
    v = abs(ov)
    d_thr = distinguishability_threshold(infl, eps2)
    d_phi = two_level_trace_distance(min(v, 1.0))
    return DualityReport(
        visibility=v,
        d_b_threshold=d_thr,
        d_b_phi=d_phi,
        slack=1.0 - v * v - d_thr * d_thr,
        n_created=0.5 * infl.gamma_A,
        sigma_x=ov.real,
        sigma_y=-ov.imag + 0.0,
    )


def particle_number(protocol_A, field: FieldParams,
                    spec: QuadratureSpec | None = None) -> float:
    """Created particle number <n> = int d^3k/(2pi)^3 |F(w_k)|^2 / (2 w_k).

    Integrated in the frequency variable, w from m to w(Lambda) with
    k = sqrt(w^2 - m^2), as an implementation independent of the momentum
    integral behind Gamma_A; the two must agree as <n> = Gamma_A / 2.
    """
    spec = spec or QuadratureSpec()
    if protocol_A.is_zero:
        return 0.0
    m = field.m
    if m <= 0.0 and protocol_A.has_plateau:
        raise IRDivergenceError(
            "particle number of a plateau protocol is IR log-divergent at m = 0")
    cut = field.uv_cutoff
    if cut is None:
        raise ValueError("field.uv_cutoff must be resolved")
    desc = _core.descriptor(protocol_A)
    w_max = math.hypot(cut, m)

    def integrand(w):
        k = np.sqrt(np.maximum(w * w - m * m, 0.0))
        F = _core.fourier_pl(w, *desc)
        return k * np.abs(F) ** 2 / (4.0 * np.pi ** 2)

    t_span = protocol_A.support_end - min(protocol_A.finite_start, 0.0)
    period = 2.0 * np.pi / max(t_span, 1e-30)
    width = max(spec.oscillatory_periods_per_panel * period,
                (w_max - m) / max(spec.max_subdivisions // 2, 8))
    pts = np.arange(m + width, w_max, width)
    res = adaptive_quad(integrand, m, w_max, spec, points=pts)
    return res.value


def two_level_trace_distance(v) -> float:
    """Trace distance of two pure states with overlap magnitude v.

    Builds the 2x2 difference matrix in the span of the two states
    (cos(theta) = v) and sums its positive eigenvalues, which gives
    |sin(theta)| = sqrt(1 - v^2); the construction verifies v^2 + D^2 = 1.
    """
    if not 0.0 <= v <= 1.0:
        raise ValueError(f"overlap magnitude must lie in [0, 1], got {v}")
    s = math.sqrt(max(0.0, 1.0 - v * v))
    mat = np.array([[s * s, -v * s], [-v * s, -s * s]])
    eig = np.linalg.eigvalsh(mat)
    d = float(np.sum(eig[eig > 0]))
    if abs(v * v + d * d - 1.0) > 1e-10:
        raise AssertionError("two-level construction violated v^2 + D^2 = 1")
    return d
