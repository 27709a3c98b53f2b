import numpy as np
import pytest

from kinetic import settings


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


@pytest.fixture(autouse=True)
def _reset_degree_cap():
    settings.set_degree_cap(None)
    yield
    settings.set_degree_cap(None)
