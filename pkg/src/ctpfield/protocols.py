"""Time-dependent detector couplings and their closed-form frequency transforms.

Both detector protocols are piecewise linear in time.  The spin-source
protocol carries a constant plateau on (-inf, 0] that is switched on
adiabatically in the infinite past; the plateau is represented exactly by a
flag, never by a finite switch-on time.  Its frequency transform

    F(w) = int dt lam(t) e^{i w t}

is computed in closed form by integrating by parts on dlam/dt: the slope
and jump contributions are elementary, and the plateau boundary term at
t -> -inf vanishes in the Abel sense for any w > 0, which is the only
regime the mode integrals ever probe (w = omega_k >= m > 0).
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

__all__ = [
    "CouplingProtocol",
    "alice_protocol",
    "bob_protocol",
    "bob_protocol_smoothed",
    "zero_protocol",
    "fourier_transform",
    "cross_correlation",
]


@dataclass(frozen=True)
class CouplingProtocol:
    """Piecewise-linear coupling with an optional constant past plateau.

    ``segments`` is an ordered tuple of (t_start, t_end, value_start,
    value_end); evaluation is linear inside each segment, right-continuous
    at breakpoints, ``past_plateau`` on (-inf, first t_start], and zero
    after the last t_end.
    """

    segments: tuple
    past_plateau: float = 0.0
    amplitude: float = 0.0

    def __post_init__(self):
        prev_end = None
        for seg in self.segments:
            t0, t1, v0, v1 = seg
            if not all(math.isfinite(x) for x in seg):
                raise ValueError(f"non-finite segment {seg}")
            if not t1 > t0:
                raise ValueError(f"segment must have t_end > t_start: {seg}")
            if prev_end is not None and t0 < prev_end:
                raise ValueError("segments overlap or are out of order")
            prev_end = t1
        if self.past_plateau != 0.0:
            if not self.segments:
                raise ValueError("a plateau requires at least one segment")
            if self.past_plateau != self.segments[0][2]:
                raise ValueError("plateau must match the first breakpoint value")

    # -- support queries ---------------------------------------------------

    @property
    def is_zero(self):
        return not self.segments and self.past_plateau == 0.0

    @property
    def has_plateau(self):
        return self.past_plateau != 0.0

    @property
    def finite_start(self):
        """Start of the finite (non-plateau) part."""
        return self.segments[0][0] if self.segments else 0.0

    @property
    def support_end(self):
        return self.segments[-1][1] if self.segments else 0.0

    @property
    def breakpoints(self):
        if not self.segments:
            return ()
        pts = [self.segments[0][0]]
        for _, t1, _, _ in self.segments:
            pts.append(t1)
        return tuple(dict.fromkeys(pts))

    def jumps(self):
        """Discontinuities as (time, value_after - value_before) pairs."""
        out = []
        prev_val = self.past_plateau
        prev_end = None
        for t0, t1, v0, v1 in self.segments:
            if prev_end is not None and t0 > prev_end:
                # gap between segments: value drops to 0 then jumps to v0
                if prev_val != 0.0:
                    out.append((prev_end, -prev_val))
                prev_val = 0.0
            if v0 != prev_val:
                out.append((t0, v0 - prev_val))
            prev_val = v1
            prev_end = t1
        if self.segments and prev_val != 0.0:
            out.append((prev_end, -prev_val))
        return out

    def slopes(self):
        """(t_start, t_end, slope) for every segment with nonzero slope."""
        out = []
        for t0, t1, v0, v1 in self.segments:
            s = (v1 - v0) / (t1 - t0)
            if s != 0.0:
                out.append((t0, t1, s))
        return out

    # -- evaluation --------------------------------------------------------

    def __call__(self, t):
        scalar = np.isscalar(t)
        t = np.atleast_1d(np.asarray(t, dtype=float))
        out = np.zeros_like(t)
        if self.has_plateau:
            out[t < self.finite_start] = self.past_plateau
        for t0, t1, v0, v1 in self.segments:
            sel = (t >= t0) & (t < t1)
            out[sel] = v0 + (v1 - v0) * (t[sel] - t0) / (t1 - t0)
        if scalar:
            return float(out[0])
        return out


def alice_protocol(lambda0, t_a) -> CouplingProtocol:
    """Spin-source coupling: plateau lambda0 for t <= 0, linear ramp
    lambda0*(1 - t/t_a) on [0, t_a], zero after."""
    if not t_a > 0:
        raise ValueError(f"ramp time must be positive, got {t_a}")
    if not math.isfinite(lambda0):
        raise ValueError("coupling amplitude must be finite")
    if lambda0 == 0.0:
        return zero_protocol()
    return CouplingProtocol(
        segments=((0.0, float(t_a), float(lambda0), 0.0),),
        past_plateau=float(lambda0),
        amplitude=float(lambda0),
    )


def bob_protocol(alpha, t_b) -> CouplingProtocol:
    """Meter coupling: rectangle of height alpha on [0, t_b]."""
    if not t_b > 0:
        raise ValueError(f"meter window must be positive, got {t_b}")
    if not math.isfinite(alpha):
        raise ValueError("coupling amplitude must be finite")
    if alpha == 0.0:
        return zero_protocol()
    return CouplingProtocol(
        segments=((0.0, float(t_b), float(alpha), float(alpha)),),
        past_plateau=0.0,
        amplitude=float(alpha),
    )


def bob_protocol_smoothed(alpha, t_b, edge_width, n_sub=16) -> CouplingProtocol:
    """Rectangle with raised-cosine edges of width ``edge_width``, sampled
    as ``n_sub`` linear pieces per edge.  Useful for cutoff-regularisation
    studies of the sharp-edge UV divergence."""
    if not t_b > 0:
        raise ValueError(f"meter window must be positive, got {t_b}")
    if not 0 < edge_width <= 0.5 * t_b:
        raise ValueError("edge width must lie in (0, t_b/2]")
    xs = np.linspace(0.0, edge_width, n_sub + 1)
    rise = alpha * 0.5 * (1.0 - np.cos(np.pi * xs / edge_width))
    segs = []
    for i in range(n_sub):
        segs.append((xs[i], xs[i + 1], rise[i], rise[i + 1]))
    if t_b - 2 * edge_width > 0:
        segs.append((edge_width, t_b - edge_width, alpha, alpha))
        offset = t_b - edge_width
    else:
        offset = edge_width
    for i in range(n_sub):
        segs.append((offset + xs[i], offset + xs[i + 1],
                     rise[n_sub - i], rise[n_sub - i - 1]))
    return CouplingProtocol(segments=tuple(segs), past_plateau=0.0,
                            amplitude=float(alpha))


def zero_protocol() -> CouplingProtocol:
    return CouplingProtocol(segments=(), past_plateau=0.0, amplitude=0.0)


def fourier_transform(p: CouplingProtocol, omega):
    """Closed-form F(w) = int dt p(t) e^{i w t} for w > 0.

    Integration by parts gives
        F(w) = -(1/(i w)) [ sum_slopes s (e^{i w b} - e^{i w a})/(i w)
                            + sum_jumps dv e^{i w t_j} ],
    with the plateau boundary term at t -> -inf dropped (Abel limit).
    The point w = 0 is distributional for a plateau and rejected.
    """
    scalar = np.isscalar(omega)
    w = np.atleast_1d(np.asarray(omega, dtype=float))
    if np.any(w <= 0):
        raise ValueError("frequency transform requires omega > 0")
    acc = np.zeros_like(w, dtype=complex)
    iw = 1j * w
    for a, b, s in p.slopes():
        acc += s * (np.exp(iw * b) - np.exp(iw * a)) / iw
    for tj, dv in p.jumps():
        acc += dv * np.exp(iw * tj)
    out = -acc / iw
    return complex(out[0]) if scalar else out


def cross_correlation(f: CouplingProtocol, g: CouplingProtocol, tau):
    """X(tau) = int dt f(t) g(t - tau), exact.

    The integration runs over the finite support of whichever protocol has
    one (at least one must); within each sub-interval delimited by the
    breakpoints of both factors the product is quadratic, so a 2-point
    Gauss rule per sub-interval is exact.
    """
    if f.is_zero or g.is_zero:
        return 0.0
    if not f.has_plateau:
        lo, hi = f.finite_start, f.support_end
        fa, fb = f, g
        shift = -float(tau)  # fb evaluated at t + shift
    elif not g.has_plateau:
        # substitute u = t - tau: X = int du g(u) f(u + tau)
        lo, hi = g.finite_start, g.support_end
        fa, fb = g, f
        shift = float(tau)
    else:
        raise ValueError("cross-correlation needs one finite-support protocol")
    cuts = set(fa.breakpoints)
    for b in fb.breakpoints:
        c = b - shift
        if lo < c < hi:
            cuts.add(c)
    edges = np.array(sorted(c for c in cuts if lo <= c <= hi))
    if len(edges) < 2:
        return 0.0
    mid = 0.5 * (edges[:-1] + edges[1:])
    half = 0.5 * np.diff(edges)
    x = 1.0 / math.sqrt(3.0)
    t1 = mid - half * x
    t2 = mid + half * x
    vals = fa(t1) * fb(t1 + shift) + fa(t2) * fb(t2 + shift)
    return float(np.sum(half * vals))
