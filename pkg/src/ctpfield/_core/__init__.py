"""Numerical kernel core with backend selection.

The compiled extension (``_fast``, Cython) is preferred; the NumPy
reference backend (``_ref``) is selected automatically when the extension
has not been built.  Both expose the same four kernels and are covered by
a parity test; ``benchmarks/bench_backends.py`` compares their speed.
"""
from functools import lru_cache

import numpy as np

try:
    from . import _fast as _backend
    USING_COMPILED = True
except ImportError:
    from . import _ref as _backend
    USING_COMPILED = False

from . import _ref

fourier_pl = _backend.fourier_pl
keldysh_integrand = _backend.keldysh_integrand
time_transform = _backend.time_transform
mode_sum_retarded_kernel = _backend.mode_sum_retarded_kernel

BACKEND_NAME = "compiled" if USING_COMPILED else "numpy"

_EMPTY = np.empty(0)


@lru_cache(maxsize=256)
def descriptor(protocol):
    """Flat array form (seg_a, seg_b, slope, jump_t, jump_dv) of a
    protocol, as consumed by the kernels."""
    slopes = protocol.slopes()
    jumps = protocol.jumps()
    if slopes:
        sa, sb, ss = (np.array(x, dtype=float) for x in zip(*slopes))
    else:
        sa = sb = ss = _EMPTY
    if jumps:
        jt, jv = (np.array(x, dtype=float) for x in zip(*jumps))
    else:
        jt = jv = _EMPTY
    return (sa, sb, ss, jt, jv)


def available_backends():
    """Name -> module map of the importable backends."""
    out = {"numpy": _ref}
    if USING_COMPILED:
        out["compiled"] = _backend
    return out
