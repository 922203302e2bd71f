"""Parity between the compiled kernel core and the NumPy fallback."""
import numpy as np
import pytest

from ctpfield import _core
from ctpfield.protocols import alice_protocol, bob_protocol

BACKENDS = _core.available_backends()


@pytest.fixture
def descriptors():
    return (_core.descriptor(alice_protocol(0.8, 2.3)),
            _core.descriptor(bob_protocol(1.1, 1.4)))


requires_compiled = pytest.mark.skipif(
    not _core.USING_COMPILED, reason="compiled extension not built")


@requires_compiled
class TestBackendParity:
    def test_fourier_pl(self, descriptors, rng):
        fd, _ = descriptors
        w = np.exp(rng.uniform(np.log(0.05), np.log(200), 500))
        ref = BACKENDS["numpy"].fourier_pl(w, *fd)
        fast = BACKENDS["compiled"].fourier_pl(w, *fd)
        assert np.allclose(ref, fast, rtol=1e-13, atol=1e-300)

    def test_keldysh_integrand(self, descriptors, rng):
        fd, gd = descriptors
        k = np.sort(rng.uniform(0.0, 100.0, 400))
        for r in (0.0, 0.7, 5.0):
            ref = BACKENDS["numpy"].keldysh_integrand(k, 1.0, r, fd, gd)
            fast = BACKENDS["compiled"].keldysh_integrand(k, 1.0, r, fd, gd)
            # absolute floor scaled to the profile: cancellation near sinc
            # zeros makes a bare relative comparison meaningless there
            assert np.allclose(ref, fast, rtol=1e-10,
                               atol=1e-15 * np.abs(ref).max())

    def test_time_transform(self, rng):
        w = np.linspace(0.1, 50.0, 300)
        t = rng.uniform(-2.0, 3.0, 200)
        wt = rng.uniform(0.0, 0.1, 200)
        vals = rng.normal(size=200)
        ref = BACKENDS["numpy"].time_transform(w, t, wt, vals)
        fast = BACKENDS["compiled"].time_transform(w, t, wt, vals)
        assert np.allclose(ref, fast, rtol=1e-12, atol=1e-14)

    def test_mode_sum_retarded_kernel(self, rng):
        tau = np.linspace(-1.0, 4.0, 301)
        k = np.sort(rng.uniform(0.0, 300.0, 800))
        kw = rng.uniform(0.0, 0.4, 800)
        for m, r, sigma in ((1.0, 0.5, 0.02), (0.0, 2.0, 0.05)):
            ref = BACKENDS["numpy"].mode_sum_retarded_kernel(
                tau, k, kw, r, m, sigma)
            fast = BACKENDS["compiled"].mode_sum_retarded_kernel(
                tau, k, kw, r, m, sigma)
            assert np.allclose(ref, fast, rtol=1e-11, atol=1e-13)
            assert np.all(fast[tau <= 0] == 0.0)


def test_selected_backend_exposed():
    assert _core.BACKEND_NAME in ("compiled", "numpy")
    assert set(BACKENDS) >= {"numpy"}
