"""Free massive scalar Green's functions in 3+1 dimensions.

The retarded kernel is stored as a split (light-cone delta coefficient,
smooth timelike tail) so the delta can always be consumed analytically
inside pairings:

    G_R(dt, r) = delta(dt - r)/(4 pi r) - theta(dt - r) (m/4pi) J1(m s)/s,
    s = sqrt(dt^2 - r^2).

The tail vanishes identically for spacelike separation (causality gate,
not a numerical smallness) and for m = 0.  Keldysh pairings are never
built from a position-space kernel, which is UV-distributional at
coincident points; only the on-shell mode weight 1/(2 omega) is exposed
and the double time integrals are reduced to mode integrals.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, replace
from typing import NamedTuple

import numpy as np

from .numerics import j1_over_x

__all__ = [
    "FieldParams",
    "RetardedKernelValue",
    "omega",
    "retarded_kernel",
    "retarded_tail",
    "keldysh_mode_weight",
]


@dataclass(frozen=True)
class FieldParams:
    """Field mass, UV cutoff and detector smearing radius (natural units).

    ``uv_cutoff`` and ``smearing_radius`` may be left as None and resolved
    against a concrete experiment via :meth:`resolved`, which applies the
    defaults Lambda = 1e3 max(m, 1/t_B) and r_s = 1e-2 min(d, t_B).
    """

    m: float = 1.0
    uv_cutoff: float | None = None
    smearing_radius: float | None = None

    def __post_init__(self):
        if self.m < 0 or not math.isfinite(self.m):
            raise ValueError(f"mass must be finite and >= 0, got {self.m}")
        if self.uv_cutoff is not None and self.uv_cutoff <= self.m:
            raise ValueError("UV cutoff must exceed the mass")
        if self.smearing_radius is not None and self.smearing_radius <= 0:
            raise ValueError("smearing radius must be positive")

    def resolved(self, t_b=None, d=None) -> "FieldParams":
        cut = self.uv_cutoff
        if cut is None:
            if t_b is None:
                raise ValueError("need t_B to resolve the default UV cutoff")
            cut = 1e3 * max(self.m, 1.0 / t_b)
        rs = self.smearing_radius
        if rs is None:
            if t_b is None or d is None:
                raise ValueError("need t_B and d to resolve the default smearing")
            rs = 1e-2 * min(d, t_b)
        if d is not None and rs > 0.2 * d:
            raise ValueError(
                f"smearing radius {rs} is not small against the separation {d}")
        return replace(self, uv_cutoff=cut, smearing_radius=rs)


class RetardedKernelValue(NamedTuple):
    delta_coefficient: float  # weight of delta(dt - r), equal to 1/(4 pi r)
    tail: float               # smooth part; exactly 0 unless dt > r


def omega(k, m):
    """On-shell dispersion sqrt(k^2 + m^2)."""
    k = np.asarray(k, dtype=float)
    if np.any(k < 0):
        raise ValueError("momentum magnitude must be >= 0")
    out = np.hypot(k, m)
    if out.ndim == 0:
        return float(out)
    return out


def retarded_tail(dt, r, m):
    """Timelike tail of the retarded kernel; 0 for dt <= r or m = 0."""
    scalar = np.isscalar(dt)
    dt = np.atleast_1d(np.asarray(dt, dtype=float))
    out = np.zeros_like(dt)
    if m > 0:
        inside = dt > r
        s = np.sqrt(np.maximum(dt[inside] ** 2 - r * r, 0.0))
        out[inside] = -(m * m / (4.0 * np.pi)) * j1_over_x(m * s)
    if scalar:
        return float(out[0])
    return out


def retarded_kernel(dt, r, params: FieldParams) -> RetardedKernelValue:
    """Split retarded kernel at time lag ``dt`` and separation ``r`` > 0."""
    if not r > 0:
        raise ValueError("separation must be positive; use the smeared "
                         "variant for self-pairing")
    return RetardedKernelValue(
        delta_coefficient=1.0 / (4.0 * np.pi * r),
        tail=retarded_tail(dt, r, params.m),
    )


def keldysh_mode_weight(om, m):
    """On-shell Keldysh weight 1/(2 omega) for omega >= m > 0."""
    if not m > 0:
        raise ValueError("Keldysh mode weight requires m > 0")
    om_arr = np.asarray(om, dtype=float)
    if np.any(om_arr < m * (1.0 - 1e-12)):
        raise ValueError(f"omega below the mass shell: {om} < {m}")
    out = 0.5 / om_arr
    if out.ndim == 0:
        return float(out)
    return out
