"""The warping group on [0, 1] and its norm-preserving action on functions.

Warpings are stored by their values at the grid points with piecewise
linear interpolation in between. The square-root-slope map sends a
warping to a point on the unit sphere in L2, where the intrinsic
(Karcher) mean is computed with the usual sphere exp/log maps.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field

import numpy as np

from .gridfn import Grid, GridFunction, derivative

__all__ = [
    "Warping",
    "SqrtSlope",
    "KarcherConvergenceWarning",
    "identity_warping",
    "compose",
    "inverse",
    "action",
    "to_sqrt_slope",
    "from_sqrt_slope",
    "fisher_rao_distance",
    "karcher_mean",
    "center_warpings",
]

SLOPE_FLOOR = 1e-8
KARCHER_STEP = 0.3
KARCHER_TOL = 1e-6
KARCHER_MAX_ITER = 50


class KarcherConvergenceWarning(UserWarning):
    pass


@dataclass(frozen=True)
class Warping:
    """Boundary-preserving strictly increasing bijection of [0, 1]."""

    grid: Grid
    values: np.ndarray = field(repr=False)

    def __post_init__(self):
        vals = np.asarray(self.values, dtype=float)
        object.__setattr__(self, "values", vals)
        if vals.shape != (self.grid.m,):
            raise ValueError("warping values length does not match grid")
        if vals[0] != 0.0 or vals[-1] != 1.0:
            raise ValueError("warping must fix the endpoints 0 and 1")
        if np.any(np.diff(vals) <= 0.0):
            raise ValueError("warping values must be strictly increasing")


@dataclass(frozen=True)
class SqrtSlope:
    """Square root of a warping's slope; unit-norm in L2."""

    grid: Grid
    values: np.ndarray = field(repr=False)

    def __post_init__(self):
        vals = np.asarray(self.values, dtype=float)
        object.__setattr__(self, "values", vals)
        if vals.shape != (self.grid.m,):
            raise ValueError("sqrt-slope values length does not match grid")
        if np.any(vals <= 0.0):
            raise ValueError("sqrt-slope values must be strictly positive")
        sq = float(np.trapezoid(vals * vals, dx=self.grid.spacing))
        if abs(sq - 1.0) > 1e-6:
            raise ValueError(f"sqrt-slope must have unit L2 norm, got ||psi||^2={sq}")


def _as_warping(grid: Grid, vals: np.ndarray) -> Warping:
    """Clip to [0, 1], pin the endpoints, and repair weak monotonicity."""
    v = np.clip(vals, 0.0, 1.0)
    v[0], v[-1] = 0.0, 1.0
    d = np.diff(v)
    if np.any(d <= 0.0):
        # nudge flat spots by a tiny ramp, then renormalize back to [0, 1]
        v = np.maximum.accumulate(v)
        v = v + np.linspace(0.0, 1.0, grid.m) * 1e-12
        v = (v - v[0]) / (v[-1] - v[0])
        if np.any(np.diff(v) <= 0.0):
            raise ValueError("warping degenerated: strict-increase repair failed")
    return Warping(grid, v)


def identity_warping(grid: Grid) -> Warping:
    return Warping(grid, grid.points.copy())


def compose(gamma1: Warping, gamma2: Warping) -> Warping:
    """(gamma1 o gamma2) evaluated at the grid points."""
    if gamma1.grid != gamma2.grid:
        raise ValueError("warpings live on different grids")
    vals = np.interp(gamma2.values, gamma1.grid.points, gamma1.values)
    return _as_warping(gamma1.grid, vals)


def inverse(gamma: Warping) -> Warping:
    """Numerical inverse by swapping axes and re-interpolating."""
    vals = np.interp(gamma.grid.points, gamma.values, gamma.grid.points)
    return _as_warping(gamma.grid, vals)


def warp_slope(gamma: Warping) -> np.ndarray:
    """Finite-difference slope of a warping, floored away from zero."""
    d = derivative(GridFunction(gamma.grid, gamma.values)).values
    return np.maximum(d, SLOPE_FLOOR)


def action(g: GridFunction, gamma: Warping) -> GridFunction:
    """Norm-preserving group action (g o gamma) * sqrt(d gamma / dt)."""
    if g.grid != gamma.grid:
        raise ValueError("function and warping live on different grids")
    composed = np.interp(gamma.values, g.grid.points, g.values)
    return GridFunction(g.grid, composed * np.sqrt(warp_slope(gamma)))


def to_sqrt_slope(gamma: Warping) -> SqrtSlope:
    psi = np.sqrt(warp_slope(gamma))
    nrm = np.sqrt(np.trapezoid(psi * psi, dx=gamma.grid.spacing))
    return SqrtSlope(gamma.grid, psi / nrm)


def from_sqrt_slope(psi: SqrtSlope) -> Warping:
    sq = np.maximum(psi.values, SLOPE_FLOOR) ** 2
    h = psi.grid.spacing
    gamma = np.concatenate(([0.0], np.cumsum((sq[1:] + sq[:-1]) * 0.5 * h)))
    gamma /= gamma[-1]
    return _as_warping(psi.grid, gamma)


def _sphere_inner(a: np.ndarray, b: np.ndarray, h: float) -> float:
    return float(np.trapezoid(a * b, dx=h))


def fisher_rao_distance(gamma1: Warping, gamma2: Warping) -> float:
    """Geodesic distance on the sphere of square-root slopes."""
    psi1 = to_sqrt_slope(gamma1).values
    psi2 = to_sqrt_slope(gamma2).values
    c = np.clip(_sphere_inner(psi1, psi2, gamma1.grid.spacing), -1.0, 1.0)
    return float(np.arccos(c))


def karcher_mean(
    gammas: list[Warping],
    tol: float = KARCHER_TOL,
    max_iter: int = KARCHER_MAX_ITER,
) -> Warping:
    """Intrinsic mean of warpings under the Fisher-Rao metric.

    Gradient descent on the unit sphere of square-root slopes starting at
    the normalized extrinsic mean, with step size KARCHER_STEP. Emits a
    KarcherConvergenceWarning and returns the last iterate if the descent
    does not reach tol within max_iter steps.
    """
    if not gammas:
        raise ValueError("karcher_mean of an empty list")
    grid = gammas[0].grid
    for g in gammas[1:]:
        if g.grid != grid:
            raise ValueError("warpings live on different grids")
    h = grid.spacing
    psis = np.stack([to_sqrt_slope(g).values for g in gammas])

    mu = psis.mean(axis=0)
    mu /= np.sqrt(_sphere_inner(mu, mu, h))

    for _ in range(max_iter):
        c = np.clip(np.trapezoid(psis * mu, dx=h, axis=1), -1.0, 1.0)
        theta = np.arccos(c)
        scale = np.where(theta > 1e-14, theta / np.sin(np.maximum(theta, 1e-14)), 1.0)
        vbar = (scale[:, None] * (psis - c[:, None] * mu)).mean(axis=0)
        vnorm = np.sqrt(max(_sphere_inner(vbar, vbar, h), 0.0))
        if vnorm < tol:
            break
        step = KARCHER_STEP * vnorm
        mu = np.cos(step) * mu + np.sin(step) * (vbar / vnorm)
        mu /= np.sqrt(_sphere_inner(mu, mu, h))
    else:
        warnings.warn(
            f"Karcher mean did not converge within {max_iter} iterations "
            f"(last gradient norm {vnorm:.3e})",
            KarcherConvergenceWarning,
        )

    return from_sqrt_slope(SqrtSlope(grid, np.maximum(mu, SLOPE_FLOOR)))


CENTERING_PASSES = 3
CENTERING_TOL = 1e-3


def center_warpings(gammas: list[Warping]) -> tuple[list[Warping], Warping]:
    """Recenter a family so the Karcher mean of the inverses is the identity.

    Returns (mu o gamma_i for each i, mu) with mu the accumulated Karcher
    mean of the inverse warpings. A single composition leaves an O(1/m)
    discretization residual on coarse grids, so the correction is repeated
    (up to CENTERING_PASSES times) until the constraint holds to
    CENTERING_TOL.
    """
    grid = gammas[0].grid
    ident = identity_warping(grid)
    centered = list(gammas)
    mu_total = ident
    for _ in range(CENTERING_PASSES):
        mu = karcher_mean([inverse(g) for g in centered])
        centered = [compose(mu, g) for g in centered]
        mu_total = compose(mu, mu_total)
        if fisher_rao_distance(mu, ident) < CENTERING_TOL:
            break
    return centered, mu_total
