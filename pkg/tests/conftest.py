import numpy as np
import pytest
from hypothesis import HealthCheck, settings

from spinodal import GridSpec, build_clifford_rep

settings.register_profile(
    "spinodal", deadline=None, max_examples=25, suppress_health_check=[HealthCheck.too_slow], derandomize=True
)
settings.load_profile("spinodal")


@pytest.fixture(scope="session")
def rep2():
    return build_clifford_rep(2)


@pytest.fixture(scope="session")
def rep3():
    return build_clifford_rep(3)


@pytest.fixture(scope="session")
def grid3():
    return GridSpec(3, 1.0, 1 / 16)


@pytest.fixture
def rng():
    return np.random.default_rng(1234)
