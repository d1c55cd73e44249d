"""Synthetic scenario generators and the fluctuation transform."""

import numpy as np
import pytest

from trendwarp.gridfn import norm
from trendwarp.synthgen import SCENARIOS, ScenarioSpec, fluctuation, generate
from trendwarp.warping import (
    action,
    fisher_rao_distance,
    identity_warping,
    inverse,
    karcher_mean,
)


def test_spec_validation():
    with pytest.raises(ValueError):
        ScenarioSpec(name="nope")
    with pytest.raises(ValueError):
        ScenarioSpec(name="fig1", n=1)
    with pytest.raises(ValueError):
        ScenarioSpec(name="fig1", m=2)
    with pytest.raises(ValueError):
        ScenarioSpec(name="fig1", sigma=-0.1)


@pytest.mark.parametrize("name", SCENARIOS)
def test_all_scenarios_generate(name):
    fs, truth = generate(ScenarioSpec(name=name, n=6, m=80, sigma=0.1, seed=1))
    assert len(fs) == 6
    assert len(truth.warpings) == 6
    for w in truth.warpings:
        assert np.all(np.diff(w.values) > 0)
        assert w.values[0] == 0.0 and w.values[-1] == 1.0


def test_deterministic_bitwise():
    spec = ScenarioSpec(name="noise_perturbation", n=5, m=90, sigma=0.3, seed=7)
    fs1, _ = generate(spec)
    fs2, _ = generate(spec)
    for a, b in zip(fs1, fs2):
        assert np.array_equal(a.values, b.values)


def test_seed_matters():
    a, _ = generate(ScenarioSpec(name="fig1", n=4, m=50, sigma=0.2, seed=1))
    b, _ = generate(ScenarioSpec(name="fig1", n=4, m=50, sigma=0.2, seed=2))
    assert not np.array_equal(a[0].values, b[0].values)


def test_noiseless_panel_matches_model_exactly():
    fs, truth = generate(ScenarioSpec(name="fig1", n=5, m=120, sigma=0.0, seed=0))
    for f, gamma in zip(fs, truth.warpings):
        resid = f - truth.h - action(truth.g, gamma)
        assert np.max(np.abs(resid.values)) < 1e-12


def test_fig1_closed_forms():
    fs, truth = generate(ScenarioSpec(name="fig1", n=5, m=120, sigma=0.0, seed=0))
    t = fs[0].grid.points
    assert np.allclose(truth.h.values, 1.5 * np.exp(-3.0 * t), atol=1e-12)
    assert np.allclose(truth.g.values, np.cos(10.0 * np.pi * t), atol=1e-12)


def test_truth_warpings_are_centered():
    for name in SCENARIOS:
        fs, truth = generate(ScenarioSpec(name=name, n=10, m=150, sigma=0.0, seed=0))
        km = karcher_mean([inverse(w) for w in truth.warpings])
        assert fisher_rao_distance(km, identity_warping(fs[0].grid)) < 1e-2


def test_noise_level_scales():
    spec0 = ScenarioSpec(name="fig1", n=20, m=150, sigma=0.0, seed=3)
    spec1 = ScenarioSpec(name="fig1", n=20, m=150, sigma=0.5, seed=3)
    fs0, _ = generate(spec0)
    fs1, _ = generate(spec1)
    resid = np.concatenate([(a - b).values for a, b in zip(fs1, fs0)])
    assert np.std(resid) == pytest.approx(0.5, rel=0.05)


def test_fluctuation_oracle():
    # (110-100)/100 = +10%, (99-110)/110 = -10%
    out = fluctuation([100.0, 110.0, 99.0])
    assert np.allclose(out, [10.0, -10.0])


def test_fluctuation_validation():
    with pytest.raises(ValueError):
        fluctuation([1.0])
    with pytest.raises(ValueError):
        fluctuation([1.0, -2.0, 3.0])
    with pytest.raises(ValueError):
        fluctuation(np.ones((2, 2)))


def test_panel_norm_reasonable():
    fs, truth = generate(ScenarioSpec(name="subspace_selection", n=8, m=100, sigma=0.0, seed=2))
    # the seasonal action preserves norm, so each noiseless f is bounded by
    # ||h|| + ||g|| and is nonzero
    bound = norm(truth.h) + norm(truth.g) + 1e-6
    for f in fs:
        assert 0.0 < norm(f) <= bound
