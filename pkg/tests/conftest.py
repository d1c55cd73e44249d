import numpy as np
import pytest

from trendwarp.gridfn import Grid, GridFunction
from trendwarp.warping import Warping, _as_warping


@pytest.fixture
def grid201():
    return Grid.uniform(201)


@pytest.fixture
def grid101():
    return Grid.uniform(101)


def random_warping(grid: Grid, rng, roughness: float = 1.0) -> Warping:
    """A random smooth strictly increasing warping.

    The log-slope is a low-order random trigonometric polynomial, so the
    warping is C-infinity and interpolation errors stay O(1/m^2).
    """
    t = grid.points
    field = np.zeros_like(t)
    for k in range(1, 4):
        field += rng.normal(0.0, 1.0 / k) * np.sin(np.pi * k * t)
        field += rng.normal(0.0, 1.0 / k) * np.cos(np.pi * k * t)
    slopes = np.exp(roughness * field)
    mids = 0.5 * (slopes[1:] + slopes[:-1])
    vals = np.concatenate(([0.0], np.cumsum(mids)))
    return _as_warping(grid, vals / vals[-1])


def gf(grid: Grid, fn) -> GridFunction:
    return GridFunction(grid, np.asarray(fn(grid.points), dtype=float))
