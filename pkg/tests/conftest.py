import numpy as np
import pytest

from cornerstone.bcalc import ModelGrid
from cornerstone.decoupage import corner_model, interval_model


@pytest.fixture(scope="session")
def grid1024():
    return ModelGrid(20.0, 1024)


@pytest.fixture(scope="session")
def grid512():
    return ModelGrid(20.0, 512)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


@pytest.fixture(scope="session")
def interval():
    return interval_model()


@pytest.fixture(scope="session")
def square():
    return corner_model(2)
