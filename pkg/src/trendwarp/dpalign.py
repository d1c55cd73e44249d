"""Dynamic-programming solver for the single-observation warping subproblem.

Finds the monotone lattice path minimizing || q - (r, gamma) ||^2 over
piecewise-linear warpings whose vertices lie on an N x N lattice and
whose segment slopes come from a fixed set of coprime steps. The cost
accumulated along a path is the trapezoidal quadrature of the global
integrand restricted to its segments, so the DP value matches the full
L2 objective of the returned warping up to quadrature error.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from numba import njit, prange

from .gridfn import Grid, GridFunction
from .warping import Warping, _as_warping

__all__ = ["DpConfig", "default_neighborhood", "segment_cost", "dp_align", "dp_align_batch"]

LATTICE_CAP = 201
MAX_STEP_DEFAULT = 7


def default_neighborhood(max_step: int = MAX_STEP_DEFAULT) -> tuple[tuple[int, int], ...]:
    """All coprime slope steps (p, q) with 1 <= p, q <= max_step.

    Ordered diagonal-first (|p - q| minimal, then smaller p) so that the
    first strict improvement in the DP scan realizes the tie-break rule.
    """
    steps = [
        (p, q)
        for p in range(1, max_step + 1)
        for q in range(1, max_step + 1)
        if math.gcd(p, q) == 1
    ]
    steps.sort(key=lambda s: (abs(s[0] - s[1]), s[0], s[1]))
    return tuple(steps)


@dataclass(frozen=True)
class DpConfig:
    """Lattice resolution and slope neighborhood for the DP search."""

    lattice_size: int | None = None
    neighborhood: tuple = field(default_factory=default_neighborhood)

    def __post_init__(self):
        if not self.neighborhood:
            raise ValueError("DP neighborhood must be nonempty")
        for p, q in self.neighborhood:
            if p < 1 or q < 1:
                raise ValueError("DP steps must be strictly positive in both coordinates")
        if self.lattice_size is not None and self.lattice_size < 2:
            raise ValueError("lattice_size must be at least 2")

    def resolve_lattice(self, grid: Grid) -> int:
        if self.lattice_size is not None:
            return self.lattice_size
        return min(grid.m, LATTICE_CAP)

    def steps_array(self) -> np.ndarray:
        return np.asarray(self.neighborhood, dtype=np.int64)


@njit(cache=True)
def _segment_cost_kernel(qv, rv, j0, k0, j1, k1, h):
    # trapezoidal quadrature of (q(t) - r(gamma(t)) sqrt(slope))^2 over the
    # segment, sampled at the lattice abscissas j0..j1
    p = j1 - j0
    s = (k1 - k0) / p
    sqrt_s = np.sqrt(s)
    nmax = len(rv) - 2
    acc = 0.0
    for u in range(p + 1):
        pos = k0 + s * u
        i = int(pos)
        if i > nmax:
            i = nmax
        frac = pos - i
        rval = rv[i] * (1.0 - frac) + rv[i + 1] * frac
        d = qv[j0 + u] - rval * sqrt_s
        if u == 0 or u == p:
            acc += 0.5 * d * d
        else:
            acc += d * d
    return acc * h


@njit(cache=True)
def _dp_solve(qv, rv, steps):
    N = len(qv)
    h = 1.0 / (N - 1)
    E = np.full((N, N), np.inf)
    Pj = np.full((N, N), -1, dtype=np.int64)
    Pk = np.full((N, N), -1, dtype=np.int64)
    E[0, 0] = 0.0
    nsteps = steps.shape[0]
    for j in range(1, N):
        for k in range(1, N):
            best = np.inf
            bj = -1
            bk = -1
            for si in range(nsteps):
                jp = j - steps[si, 0]
                kq = k - steps[si, 1]
                if jp < 0 or kq < 0:
                    continue
                e = E[jp, kq]
                if e == np.inf:
                    continue
                c = e + _segment_cost_kernel(qv, rv, jp, kq, j, k, h)
                if c < best:
                    best = c
                    bj = jp
                    bk = kq
            E[j, k] = best
            Pj[j, k] = bj
            Pk[j, k] = bk

    gam = np.full(N, -1.0)
    cost = E[N - 1, N - 1]
    if cost == np.inf:
        return cost, gam

    # walk the backpointers, then fill gamma along each linear segment
    path_j = np.empty(N + 1, dtype=np.int64)
    path_k = np.empty(N + 1, dtype=np.int64)
    cnt = 0
    j, k = N - 1, N - 1
    while j != -1:
        path_j[cnt] = j
        path_k[cnt] = k
        cnt += 1
        j, k = Pj[j, k], Pk[j, k]
    for idx in range(cnt - 1, 0, -1):
        j0, k0 = path_j[idx], path_k[idx]
        j1, k1 = path_j[idx - 1], path_k[idx - 1]
        for u in range(j0, j1 + 1):
            gam[u] = (k0 + (k1 - k0) * (u - j0) / (j1 - j0)) / (N - 1)
    return cost, gam


@njit(cache=True, parallel=True)
def _dp_solve_batch(Q, rv, steps):
    n, N = Q.shape
    costs = np.empty(n)
    gammas = np.empty((n, N))
    for i in prange(n):
        c, g = _dp_solve(Q[i], rv, steps)
        costs[i] = c
        gammas[i] = g
    return costs, gammas


def _on_lattice(f: GridFunction, lattice_t: np.ndarray) -> np.ndarray:
    return np.interp(lattice_t, f.grid.points, f.values)


def segment_cost(
    q: GridFunction, r: GridFunction, a: tuple[int, int], b: tuple[int, int], cfg: DpConfig
) -> float:
    """Cost of the linear warping segment between lattice nodes a and b."""
    if q.grid != r.grid:
        raise ValueError("q and r live on different grids")
    if b[0] <= a[0] or b[1] <= a[1]:
        raise ValueError("segment must run strictly northeast")
    N = cfg.resolve_lattice(q.grid)
    lattice_t = np.linspace(0.0, 1.0, N)
    return float(
        _segment_cost_kernel(
            _on_lattice(q, lattice_t), _on_lattice(r, lattice_t),
            a[0], a[1], b[0], b[1], 1.0 / (N - 1),
        )
    )


def _gamma_to_warping(gam_lattice: np.ndarray, grid: Grid) -> Warping:
    lattice_t = np.linspace(0.0, 1.0, len(gam_lattice))
    return _as_warping(grid, np.interp(grid.points, lattice_t, gam_lattice))


def dp_align(q: GridFunction, r: GridFunction, cfg: DpConfig | None = None) -> tuple[Warping, float]:
    """Best piecewise-linear warping of r onto q and its attained cost."""
    warps, costs = dp_align_batch([q], r, cfg)
    return warps[0], float(costs[0])


def dp_align_batch(
    qs: list[GridFunction], r: GridFunction, cfg: DpConfig | None = None
) -> tuple[list[Warping], np.ndarray]:
    """dp_align for several left-hand functions against one template."""
    cfg = cfg or DpConfig()
    grid = r.grid
    for q in qs:
        if q.grid != grid:
            raise ValueError("q and r live on different grids")
    N = cfg.resolve_lattice(grid)
    lattice_t = np.linspace(0.0, 1.0, N)
    Q = np.stack([_on_lattice(q, lattice_t) for q in qs])
    costs, gammas = _dp_solve_batch(Q, _on_lattice(r, lattice_t), cfg.steps_array())
    if np.any(np.isinf(costs)):
        raise ValueError(
            "DP neighborhood cannot reach the (1,1) corner at this lattice size"
        )
    return [_gamma_to_warping(g, grid) for g in gammas], costs
