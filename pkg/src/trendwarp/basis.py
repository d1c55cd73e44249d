"""Trend-subspace bases: Fourier, sine, cosine, and shifted Legendre.

The raw families are orthonormalized numerically on the working grid so
that the projection formulas used by the estimator are exact under the
discrete inner product (the shifted Legendre elements as listed carry a
1/(2k-1) prefactor and are not unit norm; discrete quadrature also breaks
exact orthogonality for the trigonometric families).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from enum import Enum

import numpy as np

from .gridfn import Grid, GridFunction, inner_product

__all__ = [
    "BasisFamily",
    "BasisSpec",
    "OrthonormalBasis",
    "raw_basis_element",
    "build_orthonormal",
    "project",
    "project_complement",
]

L_MAX_DEFAULT = 20


class BasisFamily(Enum):
    FOURIER = "fourier"
    SINE = "sine"
    COSINE = "cosine"
    SHIFTED_LEGENDRE = "legendre"


@dataclass(frozen=True)
class BasisSpec:
    family: BasisFamily
    l: int
    l_max: int = L_MAX_DEFAULT

    def __post_init__(self):
        if not 1 <= self.l <= self.l_max:
            raise ValueError(f"truncation level l={self.l} outside [1, {self.l_max}]")


@dataclass(frozen=True)
class OrthonormalBasis:
    spec: BasisSpec
    grid: Grid
    functions: tuple = field(repr=False)

    @property
    def l(self) -> int:
        return self.spec.l


def _raw_values(family: BasisFamily, k: int, t: np.ndarray) -> np.ndarray:
    if family is BasisFamily.FOURIER:
        # ordering: 1, sqrt2 sin(2 pi t), sqrt2 cos(2 pi t), sqrt2 sin(4 pi t), ...
        if k == 1:
            return np.ones_like(t)
        n = k // 2
        if k % 2 == 0:
            return math.sqrt(2.0) * np.sin(2.0 * n * np.pi * t)
        return math.sqrt(2.0) * np.cos(2.0 * n * np.pi * t)
    if family is BasisFamily.SINE:
        return math.sqrt(2.0) * np.sin(k * np.pi * t)
    if family is BasisFamily.COSINE:
        if k == 1:
            return np.ones_like(t)
        return math.sqrt(2.0) * np.cos((k - 1) * np.pi * t)
    if family is BasisFamily.SHIFTED_LEGENDRE:
        acc = np.zeros_like(t)
        for j in range(k):
            acc += math.comb(k - 1, j) * math.comb(k + j - 1, j) * (-t) ** j
        return acc * (-1.0) ** (k - 1) / (2 * k - 1)
    raise ValueError(f"unknown basis family: {family}")


def raw_basis_element(family: BasisFamily, k: int, grid: Grid) -> GridFunction:
    """k-th raw element of the family (1-based), before orthonormalization."""
    if k < 1:
        raise ValueError("basis index k must be >= 1")
    return GridFunction(grid, _raw_values(family, k, grid.points))


def build_orthonormal(spec: BasisSpec, grid: Grid) -> OrthonormalBasis:
    """Modified Gram-Schmidt of the first l raw elements under the grid inner product.

    Two orthogonalization passes keep the Gram matrix within 1e-8 of the
    identity even for the Legendre family at l near 20.
    """
    funcs: list[GridFunction] = []
    for k in range(1, spec.l + 1):
        v = raw_basis_element(spec.family, k, grid)
        for _ in range(2):
            for phi in funcs:
                v = v - inner_product(v, phi) * phi
        nrm = math.sqrt(max(inner_product(v, v), 0.0))
        if nrm < 1e-10:
            raise ValueError(
                f"rank deficiency: element {k} of {spec.family.value} is numerically "
                "dependent on earlier elements on this grid"
            )
        funcs.append((1.0 / nrm) * v)
    return OrthonormalBasis(spec=spec, grid=grid, functions=tuple(funcs))


def _coeffs(f: GridFunction, basis: OrthonormalBasis) -> np.ndarray:
    if f.grid != basis.grid:
        raise ValueError("function grid does not match basis grid")
    return np.array([inner_product(f, phi) for phi in basis.functions])


def project(f: GridFunction, basis: OrthonormalBasis) -> GridFunction:
    """Orthogonal projection of f onto the span of the basis."""
    c = _coeffs(f, basis)
    vals = np.zeros(basis.grid.m)
    for ck, phi in zip(c, basis.functions):
        vals += ck * phi.values
    return GridFunction(basis.grid, vals)


def project_complement(f: GridFunction, basis: OrthonormalBasis) -> GridFunction:
    """Residual of f after projection; orthogonal to every basis element."""
    return f - project(f, basis)
