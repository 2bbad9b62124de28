import pytest
from hypothesis import HealthCheck, settings

from splitcantor.generators import twin_family

settings.register_profile(
    "default",
    deadline=None,
    max_examples=60,
    suppress_health_check=[HealthCheck.too_slow, HealthCheck.data_too_large],
)
settings.load_profile("default")


@pytest.fixture(scope="session")
def small_family():
    """n = 2, 8 indices, M = 7, patterns realized on four twin groups."""
    family, _, _ = twin_family(2, 8, 7, 1, 3, seed=5)
    return family


@pytest.fixture(scope="session")
def family_n3():
    family, _, _ = twin_family(3, 8, 7, 2, 2, seed=9)
    return family
