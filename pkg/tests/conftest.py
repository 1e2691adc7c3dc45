import numpy as np
import pytest
from hypothesis import settings

from henonlab.henon import HenonType

settings.register_profile("lab", deadline=None, max_examples=40, derandomize=True)
settings.load_profile("lab")


@pytest.fixture(scope="session")
def quad():
    """The default quadratic map p = z^2 - 1.1, a = 0.4."""
    return HenonType.quadratic(-1.1, 0.4)


@pytest.fixture(scope="session")
def hyperbolic():
    return HenonType.quadratic(-3.0, 0.2)


@pytest.fixture
def rng():
    return np.random.default_rng(7)
