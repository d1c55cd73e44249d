"""Basis families, orthonormalization, and projections."""

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from trendwarp.basis import (
    BasisFamily,
    BasisSpec,
    build_orthonormal,
    project,
    project_complement,
    raw_basis_element,
)
from trendwarp.gridfn import Grid, GridFunction, inner_product, norm

FAMILIES = list(BasisFamily)


def test_spec_validation():
    with pytest.raises(ValueError):
        BasisSpec(BasisFamily.SINE, 0)
    with pytest.raises(ValueError):
        BasisSpec(BasisFamily.SINE, 21)
    BasisSpec(BasisFamily.SINE, 25, l_max=30)  # fine with larger cap


def test_raw_fourier_elements():
    g = Grid.uniform(101)
    t = g.points
    assert np.allclose(raw_basis_element(BasisFamily.FOURIER, 1, g).values, 1.0)
    assert np.allclose(
        raw_basis_element(BasisFamily.FOURIER, 2, g).values,
        np.sqrt(2) * np.sin(2 * np.pi * t),
    )
    assert np.allclose(
        raw_basis_element(BasisFamily.FOURIER, 3, g).values,
        np.sqrt(2) * np.cos(2 * np.pi * t),
    )
    assert np.allclose(
        raw_basis_element(BasisFamily.FOURIER, 4, g).values,
        np.sqrt(2) * np.sin(4 * np.pi * t),
    )


def test_raw_sine_cosine_elements():
    g = Grid.uniform(101)
    t = g.points
    assert np.allclose(
        raw_basis_element(BasisFamily.SINE, 3, g).values,
        np.sqrt(2) * np.sin(3 * np.pi * t),
    )
    assert np.allclose(raw_basis_element(BasisFamily.COSINE, 1, g).values, 1.0)
    assert np.allclose(
        raw_basis_element(BasisFamily.COSINE, 3, g).values,
        np.sqrt(2) * np.cos(2 * np.pi * t),
    )


def test_raw_legendre_closed_forms():
    # oracle polynomials from the 1/(2k-1)-scaled shifted Legendre formula:
    #   k=1: 1,  k=2: (2t-1)/3,  k=3: (6t^2-6t+1)/5
    g = Grid.uniform(101)
    t = g.points
    assert np.allclose(raw_basis_element(BasisFamily.SHIFTED_LEGENDRE, 1, g).values, 1.0)
    assert np.allclose(
        raw_basis_element(BasisFamily.SHIFTED_LEGENDRE, 2, g).values, (2 * t - 1) / 3
    )
    assert np.allclose(
        raw_basis_element(BasisFamily.SHIFTED_LEGENDRE, 3, g).values,
        (6 * t**2 - 6 * t + 1) / 5,
    )


def test_raw_index_validation():
    with pytest.raises(ValueError):
        raw_basis_element(BasisFamily.SINE, 0, Grid.uniform(10))


@pytest.mark.parametrize("family", FAMILIES)
def test_gram_matrix_is_identity(family):
    g = Grid.uniform(401)
    basis = build_orthonormal(BasisSpec(family, 6), g)
    funcs = basis.functions
    gram = np.array(
        [[inner_product(a, b) for b in funcs] for a in funcs]
    )
    assert np.max(np.abs(gram - np.eye(6))) < 1e-8


def test_rank_deficiency_detected():
    # 5 polynomials cannot be independent on a 3-point grid
    with pytest.raises(ValueError, match="rank deficiency"):
        build_orthonormal(BasisSpec(BasisFamily.SHIFTED_LEGENDRE, 5), Grid.uniform(3))


def test_grid_mismatch_rejected():
    basis = build_orthonormal(BasisSpec(BasisFamily.COSINE, 3), Grid.uniform(50))
    f = GridFunction(Grid.uniform(60), np.zeros(60))
    with pytest.raises(ValueError):
        project(f, basis)


@settings(deadline=None, max_examples=20)
@given(seed=st.integers(0, 10_000), fam=st.sampled_from(FAMILIES))
def test_projection_idempotent(seed, fam):
    rng = np.random.default_rng(seed)
    g = Grid.uniform(201)
    basis = build_orthonormal(BasisSpec(fam, 4), g)
    f = GridFunction(g, rng.standard_normal(g.m))
    p = project(f, basis)
    pp = project(p, basis)
    assert norm(pp - p) < 1e-7


@settings(deadline=None, max_examples=20)
@given(seed=st.integers(0, 10_000), fam=st.sampled_from(FAMILIES))
def test_pythagoras(seed, fam):
    rng = np.random.default_rng(seed)
    g = Grid.uniform(201)
    basis = build_orthonormal(BasisSpec(fam, 4), g)
    f = GridFunction(g, rng.standard_normal(g.m))
    p = project(f, basis)
    q = project_complement(f, basis)
    assert norm(f) ** 2 == pytest.approx(norm(p) ** 2 + norm(q) ** 2, abs=1e-7)
    # complement is orthogonal to every basis element
    for phi in basis.functions:
        assert abs(inner_product(q, phi)) < 1e-8


@pytest.mark.parametrize("family", FAMILIES)
def test_nesting(family):
    # the first l functions of a larger basis span the smaller one
    rng = np.random.default_rng(7)
    g = Grid.uniform(201)
    small = build_orthonormal(BasisSpec(family, 3), g)
    large = build_orthonormal(BasisSpec(family, 6), g)
    f = GridFunction(g, rng.standard_normal(g.m))
    assert norm(project(f, small) - project(project(f, large), small)) < 1e-9
    for a, b in zip(small.functions, large.functions):
        assert norm(a - b) < 1e-9


def test_projection_recovers_member():
    g = Grid.uniform(301)
    basis = build_orthonormal(BasisSpec(BasisFamily.COSINE, 3), g)
    f = 1.5 * basis.functions[0] - 0.25 * basis.functions[2]
    assert norm(project(f, basis) - f) < 1e-10
    assert norm(project_complement(f, basis)) < 1e-10
