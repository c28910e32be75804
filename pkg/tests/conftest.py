import math

import numpy as np
import pytest
from hypothesis import HealthCheck, settings

settings.register_profile("default", deadline=None, max_examples=40,
                          suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("default")


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


@pytest.fixture(scope="session")
def disk():
    from hypiso.families import flat_disk
    return flat_disk(2, 3)


@pytest.fixture(scope="session")
def cap_quarter():
    from hypiso.families import geodesic_cap
    return geodesic_cap(2, 3, math.pi / 4)


@pytest.fixture(scope="session")
def catenoid_half():
    from hypiso.families import catenoid
    return catenoid(0.5)


@pytest.fixture(scope="session")
def two_disks():
    from hypiso.config import _rotated_disk
    from hypiso.families import union
    return union([_rotated_disk(3, 0.0), _rotated_disk(3, math.pi / 2)])
