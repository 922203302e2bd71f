import numpy as np
import pytest

from ctpfield.greens import FieldParams
from ctpfield.numerics import QuadratureSpec
from ctpfield.protocols import alice_protocol, bob_protocol


@pytest.fixture
def spec():
    return QuadratureSpec()


@pytest.fixture
def unit_field():
    return FieldParams(m=1.0, uv_cutoff=150.0, smearing_radius=0.01)


@pytest.fixture
def massless_field():
    return FieldParams(m=0.0, uv_cutoff=100.0, smearing_radius=0.01)


@pytest.fixture
def alice21():
    return alice_protocol(1.0, 2.0)


@pytest.fixture
def bob11():
    return bob_protocol(1.0, 1.0)


@pytest.fixture
def rng():
    return np.random.default_rng(1234)
