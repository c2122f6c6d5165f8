import numpy as np
import pytest

from bonnetforge.grid import Grid

TWO_PI = 2 * np.pi
U_RANGE = (0.3, TWO_PI - 0.3)


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


@pytest.fixture
def cyl_grid():
    return Grid.from_ranges(65, 65, U_RANGE, (-1.0, 1.0))


def random_quats(rng, n, scale=1.0):
    return rng.normal(size=(n, 4)) * scale


def random_imag(rng, n):
    q = rng.normal(size=(n, 4))
    q[:, 0] = 0.0
    return q
