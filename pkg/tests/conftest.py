import numpy as np
import pytest

from sfagauge.field import PulseParams


@pytest.fixture(scope="session")
def pulse():
    return PulseParams()


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)
