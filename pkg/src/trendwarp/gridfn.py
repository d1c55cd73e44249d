"""Functions sampled on a shared uniform grid over [0, 1].

Everything downstream (bases, warpings, the DP aligner, the estimator)
works with these sampled functions; all L2 quantities use trapezoidal
quadrature, which matches the piecewise-linear interpolation model.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

__all__ = [
    "Grid",
    "GridFunction",
    "inner_product",
    "norm",
    "eval_at",
    "derivative",
    "mean_function",
    "resample_to_grid",
]

_UNIFORMITY_RTOL = 1e-12


@dataclass(frozen=True)
class Grid:
    """A uniform partition of [0, 1] with m sample points."""

    m: int
    points: np.ndarray = field(repr=False)

    def __post_init__(self):
        pts = np.asarray(self.points, dtype=float)
        object.__setattr__(self, "points", pts)
        if self.m < 2 or len(pts) != self.m:
            raise ValueError(f"grid needs m >= 2 points, got m={self.m}, len={len(pts)}")
        if pts[0] != 0.0 or pts[-1] != 1.0:
            raise ValueError("grid must span [0, 1] exactly")
        spacing = np.diff(pts)
        h = 1.0 / (self.m - 1)
        if np.any(np.abs(spacing - h) > _UNIFORMITY_RTOL * max(h, 1.0)):
            raise ValueError("grid spacing is not uniform")

    @classmethod
    def uniform(cls, m: int) -> "Grid":
        return cls(m=m, points=np.linspace(0.0, 1.0, m))

    @property
    def spacing(self) -> float:
        return 1.0 / (self.m - 1)

    def __eq__(self, other) -> bool:
        return isinstance(other, Grid) and self.m == other.m

    def __hash__(self) -> int:
        return hash(("Grid", self.m))


@dataclass(frozen=True)
class GridFunction:
    """Real-valued function sampled at the points of a uniform grid."""

    grid: Grid
    values: np.ndarray = field(repr=False)

    def __post_init__(self):
        vals = np.asarray(self.values, dtype=float)
        object.__setattr__(self, "values", vals)
        if vals.shape != (self.grid.m,):
            raise ValueError(
                f"values length {vals.shape} does not match grid m={self.grid.m}"
            )
        if not np.all(np.isfinite(vals)):
            raise ValueError("grid function values must be finite")

    @classmethod
    def from_callable(cls, grid: Grid, fn) -> "GridFunction":
        return cls(grid, np.asarray(fn(grid.points), dtype=float))

    @classmethod
    def zeros(cls, grid: Grid) -> "GridFunction":
        return cls(grid, np.zeros(grid.m))

    def __add__(self, other: "GridFunction") -> "GridFunction":
        _check_same_grid(self, other)
        return GridFunction(self.grid, self.values + other.values)

    def __sub__(self, other: "GridFunction") -> "GridFunction":
        _check_same_grid(self, other)
        return GridFunction(self.grid, self.values - other.values)

    def __mul__(self, scalar: float) -> "GridFunction":
        return GridFunction(self.grid, self.values * float(scalar))

    __rmul__ = __mul__

    def __neg__(self) -> "GridFunction":
        return GridFunction(self.grid, -self.values)


def _check_same_grid(a, b):
    if a.grid != b.grid:
        raise ValueError(
            f"incompatible sampling: grids have m={a.grid.m} and m={b.grid.m}"
        )


def inner_product(a: GridFunction, b: GridFunction) -> float:
    """Trapezoidal approximation of the L2 inner product on [0, 1]."""
    _check_same_grid(a, b)
    return float(np.trapezoid(a.values * b.values, dx=a.grid.spacing))


def norm(a: GridFunction) -> float:
    """L2 norm induced by :func:`inner_product`."""
    return float(np.sqrt(max(inner_product(a, a), 0.0)))


def eval_at(a: GridFunction, t) -> float | np.ndarray:
    """Piecewise-linear interpolation of the sampled values at t in [0, 1]."""
    t_arr = np.asarray(t, dtype=float)
    if np.any(t_arr < 0.0) or np.any(t_arr > 1.0):
        raise ValueError("evaluation point outside [0, 1]")
    out = np.interp(t_arr, a.grid.points, a.values)
    return float(out) if np.isscalar(t) or t_arr.ndim == 0 else out


def derivative(a: GridFunction) -> GridFunction:
    """Finite-difference derivative.

    Central differences at interior points, second-order one-sided
    differences at the two endpoints.
    """
    m = a.grid.m
    if m < 3:
        raise ValueError("derivative needs at least 3 grid points")
    h = a.grid.spacing
    v = a.values
    d = np.empty(m)
    d[1:-1] = (v[2:] - v[:-2]) / (2.0 * h)
    d[0] = (-3.0 * v[0] + 4.0 * v[1] - v[2]) / (2.0 * h)
    d[-1] = (3.0 * v[-1] - 4.0 * v[-2] + v[-3]) / (2.0 * h)
    return GridFunction(a.grid, d)


def mean_function(fs: list[GridFunction]) -> GridFunction:
    """Pointwise arithmetic mean of functions on a shared grid."""
    if not fs:
        raise ValueError("cannot average an empty list of functions")
    grid = fs[0].grid
    for f in fs[1:]:
        _check_same_grid(fs[0], f)
    stacked = np.stack([f.values for f in fs])
    return GridFunction(grid, stacked.mean(axis=0))


def resample_to_grid(values, times, target: Grid) -> GridFunction:
    """Rescale an arbitrary time axis to [0, 1] and interpolate onto target.

    Accepts irregular (but strictly increasing) sample times.
    """
    values = np.asarray(values, dtype=float)
    times = np.asarray(times, dtype=float)
    if values.shape != times.shape or values.ndim != 1:
        raise ValueError("values and times must be 1-d arrays of equal length")
    if len(times) < 2:
        raise ValueError("need at least two samples to resample")
    if np.any(np.diff(times) <= 0):
        raise ValueError("sample times must be strictly increasing")
    unit_times = (times - times[0]) / (times[-1] - times[0])
    return GridFunction(target, np.interp(target.points, unit_times, values))
