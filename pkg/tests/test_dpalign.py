"""DP aligner: exhaustive-enumeration oracle, warp recovery, batch parity."""

import math

import numpy as np
import pytest

from trendwarp.dpalign import (
    DpConfig,
    _segment_cost_kernel,
    default_neighborhood,
    dp_align,
    dp_align_batch,
    segment_cost,
)
from trendwarp.gridfn import Grid, GridFunction
from trendwarp.warping import Warping, action


def enumerate_min_cost(qv, rv, steps):
    """Brute-force minimum over all monotone lattice paths.

    Accumulates segment costs left to right exactly like the DP recursion,
    so the returned minimum must agree with the DP value bit for bit
    (float addition by a fixed segment cost is monotone, hence min and +
    commute path-prefix by path-prefix).
    """
    N = len(qv)
    h = 1.0 / (N - 1)
    best = [np.inf]

    def walk(j, k, acc):
        if j == N - 1 and k == N - 1:
            if acc < best[0]:
                best[0] = acc
            return
        for p, q in steps:
            j1, k1 = j + p, k + q
            if j1 <= N - 1 and k1 <= N - 1:
                walk(j1, k1, acc + _segment_cost_kernel(qv, rv, j, k, j1, k1, h))

    walk(0, 0, 0.0)
    return best[0]


def test_default_neighborhood_shape():
    steps = default_neighborhood(7)
    assert steps[0] == (1, 1)
    assert len(steps) == len(set(steps))
    for p, q in steps:
        assert 1 <= p <= 7 and 1 <= q <= 7
        assert math.gcd(p, q) == 1
    # every coprime pair is present
    expected = sum(
        1 for p in range(1, 8) for q in range(1, 8) if math.gcd(p, q) == 1
    )
    assert len(steps) == expected


def test_config_validation():
    with pytest.raises(ValueError):
        DpConfig(neighborhood=())
    with pytest.raises(ValueError):
        DpConfig(neighborhood=((0, 1),))
    with pytest.raises(ValueError):
        DpConfig(lattice_size=1)
    assert DpConfig(lattice_size=None).resolve_lattice(Grid.uniform(500)) == 201
    assert DpConfig(lattice_size=None).resolve_lattice(Grid.uniform(50)) == 50
    assert DpConfig(lattice_size=31).resolve_lattice(Grid.uniform(50)) == 31


def test_segment_cost_matches_manual_trapezoid():
    # re-derive the segment quadrature in plain python for one diagonal run
    m = 9
    g = Grid.uniform(m)
    rng = np.random.default_rng(3)
    q = GridFunction(g, rng.standard_normal(m))
    r = GridFunction(g, rng.standard_normal(m))
    cfg = DpConfig(lattice_size=m)
    got = segment_cost(q, r, (2, 2), (6, 6), cfg)
    h = 1.0 / (m - 1)
    acc = 0.0
    for u in range(2, 7):
        d = q.values[u] - r.values[u]  # slope 1, r sampled at same nodes
        w = 0.5 if u in (2, 6) else 1.0
        acc += w * d * d
    assert got == pytest.approx(acc * h, rel=1e-12)


def test_segment_cost_validation():
    g = Grid.uniform(9)
    q = GridFunction(g, np.zeros(9))
    cfg = DpConfig(lattice_size=9)
    with pytest.raises(ValueError):
        segment_cost(q, q, (3, 3), (3, 5), cfg)  # not strictly northeast


def test_dp_equals_enumeration_small_lattices():
    # >= 100 random pairs across lattice sizes 4..10; exact equality required
    small_sets = [
        ((1, 1), (1, 2), (2, 1)),
        ((1, 1), (1, 2), (2, 1), (1, 3), (3, 1)),
        ((1, 1), (2, 3), (3, 2)),
    ]
    rng = np.random.default_rng(0)
    checked = 0
    for trial in range(102):
        N = int(rng.integers(4, 11))
        steps = small_sets[trial % len(small_sets)]
        g = Grid.uniform(N)
        q = GridFunction(g, rng.standard_normal(N))
        r = GridFunction(g, rng.standard_normal(N))
        cfg = DpConfig(lattice_size=N, neighborhood=steps)
        _, cost = dp_align(q, r, cfg)
        oracle = enumerate_min_cost(q.values, r.values, steps)
        assert cost == oracle  # bitwise
        checked += 1
    assert checked >= 100


def test_dp_identity_for_equal_inputs():
    g = Grid.uniform(101)
    r = GridFunction(g, np.sin(4 * np.pi * g.points) + g.points)
    gamma, cost = dp_align(r, r, DpConfig(lattice_size=101))
    assert cost == pytest.approx(0.0, abs=1e-12)
    assert np.max(np.abs(gamma.values - g.points)) < 1e-12


def test_dp_recovers_known_warp():
    # q = (r, gamma*) for a lattice-representable gamma*; DP should find it
    m = 201
    g = Grid.uniform(m)
    r = GridFunction(g, np.cos(6 * np.pi * g.points))
    # piecewise-linear warp through (0.25, 0.5): slopes 2 and 2/3
    vals = np.empty(m)
    brk = 50
    vals[: brk + 1] = 2.0 * g.points[: brk + 1]
    vals[brk:] = 0.5 + (g.points[brk:] - 0.25) * (2.0 / 3.0)
    vals[-1] = 1.0
    gamma_true = Warping(g, vals)
    q = action(r, gamma_true)
    gamma, cost = dp_align(q, r, DpConfig(lattice_size=m))
    assert cost < 1e-3
    assert np.max(np.abs(gamma.values - gamma_true.values)) < 0.02


def test_batch_matches_single():
    rng = np.random.default_rng(11)
    g = Grid.uniform(61)
    r = GridFunction(g, np.sin(5 * np.pi * g.points))
    qs = [GridFunction(g, rng.standard_normal(g.m) * 0.1 + r.values) for _ in range(4)]
    cfg = DpConfig(lattice_size=61)
    warps, costs = dp_align_batch(qs, r, cfg)
    for i, q in enumerate(qs):
        w, c = dp_align(q, r, cfg)
        assert c == costs[i]
        assert np.array_equal(w.values, warps[i].values)


def test_unreachable_corner_raises():
    g = Grid.uniform(4)  # N-1 = 3 is odd; a (2,2)-only neighborhood cannot land
    q = GridFunction(g, np.zeros(4))
    with pytest.raises(ValueError, match="cannot reach"):
        dp_align(q, q, DpConfig(lattice_size=4, neighborhood=((2, 2),)))


def test_grid_mismatch_rejected():
    q = GridFunction(Grid.uniform(10), np.zeros(10))
    r = GridFunction(Grid.uniform(11), np.zeros(11))
    with pytest.raises(ValueError):
        dp_align(q, r)
