import numpy as np
import pytest

from geneo import GridCircle, Group, SampledFunction, builtin_function


@pytest.fixture
def grid360():
    return GridCircle(360)


@pytest.fixture
def rotations360(grid360):
    return Group.rotations(grid360)


@pytest.fixture
def abs_sin(grid360):
    return builtin_function("abs_sin", grid360)


@pytest.fixture
def sin_sq(grid360):
    return builtin_function("sin_sq", grid360)


def random_function(rng, grid, low=0.0, high=1.0):
    return SampledFunction(grid, rng.uniform(low, high, size=grid.n))
