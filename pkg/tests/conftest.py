import numpy as np
import pytest

from neurofield.grid import GridSpec
from neurofield.kernels import CANONICAL


@pytest.fixture
def params():
    return CANONICAL


@pytest.fixture
def small_grid():
    return GridSpec(10.0, 128, 2)


@pytest.fixture
def grid_1d():
    return GridSpec(10.0, 256, 1)


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)
