"""NumPy reference implementations of the hot numerical kernels.

Functionally identical to the compiled extension ``_fast``; selected at
import time when the extension is unavailable.  Kept deliberately simple:
every routine is a direct transcription of the formulas, vectorised with
outer products and chunked to bound memory.
"""
import numpy as np

_CHUNK = 256


def fourier_pl(omega, seg_a, seg_b, seg_s, jump_t, jump_v):
    """Closed-form transform of a piecewise-linear protocol at omega > 0.

    F(w) = -(1/(iw)) [ sum_s s (e^{iwb} - e^{iwa})/(iw) + sum_j dv e^{iwt_j} ]
    """
    w = np.asarray(omega, dtype=float)
    iw = 1j * w
    acc = np.zeros(w.shape, dtype=complex)
    for a, b, s in zip(seg_a, seg_b, seg_s):
        acc += s * (np.exp(iw * b) - np.exp(iw * a)) / iw
    for t, dv in zip(jump_t, jump_v):
        acc += dv * np.exp(iw * t)
    return -acc / iw


def keldysh_integrand(k, m, r, f_desc, g_desc):
    """Mode integrand of the Keldysh pairing:

    k^2/(2 pi^2) sinc(k r) Re[F(w) conj(G(w))] / (2 w),  w = sqrt(k^2+m^2)
    """
    k = np.asarray(k, dtype=float)
    w = np.hypot(k, m)
    F = fourier_pl(w, *f_desc)
    G = fourier_pl(w, *g_desc)
    out = np.zeros_like(k)
    pos = w > 0
    sinc = np.sinc(k * (r / np.pi))
    out[pos] = (k[pos] ** 2 / (2.0 * np.pi ** 2) * sinc[pos]
                * (F[pos] * np.conj(G[pos])).real / (2.0 * w[pos]))
    return out


def time_transform(omega, t, wt, vals):
    """sum_i wt_i vals_i e^{i omega t_i} for each omega (quadrature
    counterpart of ``fourier_pl``, used by the lattice oracle)."""
    w = np.asarray(omega, dtype=float)
    coeff = np.asarray(wt, dtype=float) * np.asarray(vals, dtype=float)
    out = np.empty(w.shape, dtype=complex)
    for i in range(0, len(w), _CHUNK):
        sl = slice(i, i + _CHUNK)
        out[sl] = np.exp(1j * np.multiply.outer(w[sl], t)) @ coeff
    return out


def mode_sum_retarded_kernel(tau, k, kw, r, m, sigma):
    """Gaussian-time-smeared retarded kernel from an explicit mode sum.

    K_sigma(tau) = (1/2 pi^2) sum_k kw k^2 sinc(k r) e^{-(w sigma)^2/2}
                   sin(w tau)/w,   exactly 0 for tau <= 0.
    """
    tau = np.asarray(tau, dtype=float)
    k = np.asarray(k, dtype=float)
    w = np.hypot(k, m)
    weight = (np.asarray(kw, dtype=float) * k ** 2 * np.sinc(k * (r / np.pi))
              * np.exp(-0.5 * (w * sigma) ** 2))
    with np.errstate(divide="ignore", invalid="ignore"):
        weight = np.where(w > 0, weight / w, 0.0)
    out = np.zeros_like(tau)
    pos = np.flatnonzero(tau > 0)
    for i in range(0, len(pos), _CHUNK):
        idx = pos[i:i + _CHUNK]
        out[idx] = np.sin(np.multiply.outer(tau[idx], w)) @ weight
    return out / (2.0 * np.pi ** 2)
