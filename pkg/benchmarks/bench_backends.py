"""Benchmark the compiled kernel core against the NumPy fallback.

Run after building the extension (pip install -e . --no-build-isolation):

    python benchmarks/bench_backends.py

Covers the four hot kernels in the two regimes that matter: the small
batches the adaptive Gauss-Kronrod loop feeds (15-node panels) and the
large mode-sum batches of the lattice oracle.
"""
import time

import numpy as np

from ctpfield import _core
from ctpfield.protocols import alice_protocol, bob_protocol


def timeit(fn, *args, repeat=5, min_time=0.2):
    fn(*args)  # warm up
    best = np.inf
    for _ in range(repeat):
        n = 0
        t0 = time.perf_counter()
        while time.perf_counter() - t0 < min_time:
            fn(*args)
            n += 1
        best = min(best, (time.perf_counter() - t0) / n)
    return best


def main():
    backends = _core.available_backends()
    if "compiled" not in backends:
        print("compiled extension not built; nothing to compare")
        print("build it with: pip install -e . --no-build-isolation")
        return

    rng = np.random.default_rng(0)
    fd = _core.descriptor(alice_protocol(1.0, 5.0))
    gd = _core.descriptor(bob_protocol(1.0, 1.0))

    k_small = np.sort(rng.uniform(0.0, 150.0, 15))      # one GK panel
    k_large = np.sort(rng.uniform(0.0, 150.0, 65_536))  # batched presplit
    w_small = np.hypot(k_small, 1.0)
    w_large = np.hypot(k_large, 1.0)

    t_nodes = rng.uniform(0.0, 5.0, 4_000)
    t_wts = rng.uniform(0.0, 0.01, 4_000)
    t_vals = rng.normal(size=4_000)
    om_lattice = np.sort(rng.uniform(0.0, 60.0, 2_048))

    tau = np.linspace(-0.5, 6.0, 3_000)
    k_modes = np.sort(rng.uniform(0.0, 1600.0, 8_192))
    kw_modes = rng.uniform(0.0, 0.2, 8_192)

    cases = [
        ("fourier_pl (15 nodes)",
         lambda b: b.fourier_pl(w_small, *fd)),
        ("fourier_pl (65536 nodes)",
         lambda b: b.fourier_pl(w_large, *fd)),
        ("keldysh_integrand (15 nodes)",
         lambda b: b.keldysh_integrand(k_small, 1.0, 0.5, fd, gd)),
        ("keldysh_integrand (65536 nodes)",
         lambda b: b.keldysh_integrand(k_large, 1.0, 0.5, fd, gd)),
        ("time_transform (2048 x 4000)",
         lambda b: b.time_transform(om_lattice, t_nodes, t_wts, t_vals)),
        ("mode_sum_retarded_kernel (3000 x 8192)",
         lambda b: b.mode_sum_retarded_kernel(tau, k_modes, kw_modes,
                                              0.05, 1.0, 0.006)),
    ]

    width = max(len(name) for name, _ in cases)
    print(f"{'kernel':<{width}}  {'numpy':>10}  {'compiled':>10}  {'speedup':>8}")
    for name, call in cases:
        t_ref = timeit(call, backends["numpy"])
        t_fast = timeit(call, backends["compiled"])
        print(f"{name:<{width}}  {t_ref * 1e6:>8.1f}us  {t_fast * 1e6:>8.1f}us"
              f"  {t_ref / t_fast:>7.1f}x")


if __name__ == "__main__":
    main()
