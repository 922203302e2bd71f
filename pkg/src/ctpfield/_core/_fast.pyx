# cython: boundscheck=False, wraparound=False, cdivision=True
"""Compiled implementations of the hot numerical kernels.

Same contracts as ``_ref``; plain C loops, no temporaries.  The win over
NumPy is largest for the small batches the adaptive integrator feeds
(15-node Kronrod panels) and for the mode-sum kernel builds, where fused
loops avoid materialising outer-product matrices.
"""
import numpy as np

cimport numpy as cnp
from libc.math cimport cos, exp, sin, sqrt

cnp.import_array()

DEF TWO_PI_SQ = 19.739208802178716  # 2 * pi^2


cdef inline double _sinc(double x) nogil:
    if x < 1e-8 and x > -1e-8:
        return 1.0 - x * x / 6.0
    return sin(x) / x


cdef void _fourier_pl_fill(double[::1] w,
                           double[::1] seg_a, double[::1] seg_b,
                           double[::1] seg_s,
                           double[::1] jump_t, double[::1] jump_v,
                           double[::1] out_re, double[::1] out_im) nogil:
    cdef Py_ssize_t i, j
    cdef Py_ssize_t n = w.shape[0]
    cdef Py_ssize_t ns = seg_a.shape[0]
    cdef Py_ssize_t nj = jump_t.shape[0]
    cdef double wi, acc_re, acc_im, ca, sa, cb, sb, s, re, im
    for i in range(n):
        wi = w[i]
        acc_re = 0.0
        acc_im = 0.0
        for j in range(ns):
            # s * (e^{iwb} - e^{iwa}) / (iw)
            cb = cos(wi * seg_b[j]); sb = sin(wi * seg_b[j])
            ca = cos(wi * seg_a[j]); sa = sin(wi * seg_a[j])
            s = seg_s[j]
            re = s * (cb - ca); im = s * (sb - sa)
            acc_re += im / wi
            acc_im += -re / wi
        for j in range(nj):
            acc_re += jump_v[j] * cos(wi * jump_t[j])
            acc_im += jump_v[j] * sin(wi * jump_t[j])
        # -acc / (iw) = (-acc_im + i*acc_re*... ) careful: 1/(iw) = -i/w
        out_re[i] = -acc_im / wi
        out_im[i] = acc_re / wi


def fourier_pl(omega, seg_a, seg_b, seg_s, jump_t, jump_v):
    cdef double[::1] w = np.ascontiguousarray(omega, dtype=np.float64)
    cdef double[::1] sa = np.ascontiguousarray(seg_a, dtype=np.float64)
    cdef double[::1] sb = np.ascontiguousarray(seg_b, dtype=np.float64)
    cdef double[::1] ss = np.ascontiguousarray(seg_s, dtype=np.float64)
    cdef double[::1] jt = np.ascontiguousarray(jump_t, dtype=np.float64)
    cdef double[::1] jv = np.ascontiguousarray(jump_v, dtype=np.float64)
    out_re = np.empty(w.shape[0])
    out_im = np.empty(w.shape[0])
    cdef double[::1] ore = out_re
    cdef double[::1] oim = out_im
    _fourier_pl_fill(w, sa, sb, ss, jt, jv, ore, oim)
    return out_re + 1j * out_im


def keldysh_integrand(k, double m, double r, f_desc, g_desc):
    cdef double[::1] kk = np.ascontiguousarray(k, dtype=np.float64)
    cdef Py_ssize_t n = kk.shape[0]
    w_arr = np.hypot(np.asarray(k, dtype=np.float64), m)
    cdef double[::1] w = np.ascontiguousarray(w_arr)
    fre = np.empty(n); fim = np.empty(n)
    gre = np.empty(n); gim = np.empty(n)
    cdef double[::1] f_re = fre, f_im = fim, g_re = gre, g_im = gim
    cdef double[::1] fa = np.ascontiguousarray(f_desc[0], dtype=np.float64)
    cdef double[::1] fb = np.ascontiguousarray(f_desc[1], dtype=np.float64)
    cdef double[::1] fs = np.ascontiguousarray(f_desc[2], dtype=np.float64)
    cdef double[::1] fjt = np.ascontiguousarray(f_desc[3], dtype=np.float64)
    cdef double[::1] fjv = np.ascontiguousarray(f_desc[4], dtype=np.float64)
    cdef double[::1] ga = np.ascontiguousarray(g_desc[0], dtype=np.float64)
    cdef double[::1] gb = np.ascontiguousarray(g_desc[1], dtype=np.float64)
    cdef double[::1] gs = np.ascontiguousarray(g_desc[2], dtype=np.float64)
    cdef double[::1] gjt = np.ascontiguousarray(g_desc[3], dtype=np.float64)
    cdef double[::1] gjv = np.ascontiguousarray(g_desc[4], dtype=np.float64)
    _fourier_pl_fill(w, fa, fb, fs, fjt, fjv, f_re, f_im)
    _fourier_pl_fill(w, ga, gb, gs, gjt, gjv, g_re, g_im)
    out = np.zeros(n)
    cdef double[::1] o = out
    cdef Py_ssize_t i
    cdef double ki, wi, re
    with nogil:
        for i in range(n):
            ki = kk[i]
            wi = w[i]
            if wi > 0.0:
                re = f_re[i] * g_re[i] + f_im[i] * g_im[i]
                o[i] = ki * ki / TWO_PI_SQ * _sinc(ki * r) * re / (2.0 * wi)
    return out


def time_transform(omega, t, wt, vals):
    cdef double[::1] w = np.ascontiguousarray(omega, dtype=np.float64)
    cdef double[::1] tt = np.ascontiguousarray(t, dtype=np.float64)
    coeff_arr = np.asarray(wt, dtype=np.float64) * np.asarray(vals, dtype=np.float64)
    cdef double[::1] coeff = np.ascontiguousarray(coeff_arr)
    cdef Py_ssize_t nw = w.shape[0], nt = tt.shape[0]
    out_re = np.zeros(nw); out_im = np.zeros(nw)
    cdef double[::1] ore = out_re, oim = out_im
    cdef Py_ssize_t i, j
    cdef double wi, acc_re, acc_im, ph
    with nogil:
        for i in range(nw):
            wi = w[i]
            acc_re = 0.0
            acc_im = 0.0
            for j in range(nt):
                ph = wi * tt[j]
                acc_re += coeff[j] * cos(ph)
                acc_im += coeff[j] * sin(ph)
            ore[i] = acc_re
            oim[i] = acc_im
    return out_re + 1j * out_im


def mode_sum_retarded_kernel(tau, k, kw, double r, double m, double sigma):
    cdef double[::1] tt = np.ascontiguousarray(tau, dtype=np.float64)
    cdef double[::1] kk = np.ascontiguousarray(k, dtype=np.float64)
    cdef double[::1] ww = np.ascontiguousarray(kw, dtype=np.float64)
    cdef Py_ssize_t ntau = tt.shape[0], nk = kk.shape[0]
    om_arr = np.hypot(np.asarray(k, dtype=np.float64), m)
    cdef double[::1] om = np.ascontiguousarray(om_arr)
    weight = np.zeros(nk)
    cdef double[::1] wgt = weight
    cdef Py_ssize_t i, j
    cdef double ki, wi, acc
    with nogil:
        for j in range(nk):
            ki = kk[j]
            wi = om[j]
            if wi > 0.0:
                wgt[j] = (ww[j] * ki * ki * _sinc(ki * r)
                          * exp(-0.5 * (wi * sigma) * (wi * sigma)) / wi)
    out = np.zeros(ntau)
    cdef double[::1] o = out
    with nogil:
        for i in range(ntau):
            if tt[i] > 0.0:
                acc = 0.0
                for j in range(nk):
                    acc += wgt[j] * sin(om[j] * tt[i])
                o[i] = acc / TWO_PI_SQ
    return out
