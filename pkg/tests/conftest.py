import numpy as np
import pytest
from hypothesis import HealthCheck, settings

settings.register_profile(
    "holidet", max_examples=100, deadline=None, derandomize=True,
    suppress_health_check=[HealthCheck.too_slow],
)
settings.load_profile("holidet")


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


@pytest.fixture(scope="session")
def suite():
    from holidet.bench import household_suite
    return household_suite()


@pytest.fixture(scope="session")
def fitted_ratio(suite):
    from holidet.occupancy import fit_ratio
    return fit_ratio(suite, "F_var").best_ratio
