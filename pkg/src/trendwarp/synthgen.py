"""Seeded generators for the synthetic benchmark panels.

Each scenario fixes an analytic trend, seasonal template, and warping
family; observations are the warped superposition plus white Gaussian
noise. The analytic warpings are recentered so that the inverse family
has identity Karcher mean, which makes them directly comparable to the
(always centered) estimates.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .gridfn import Grid, GridFunction
from .warping import Warping, _as_warping, action, center_warpings

__all__ = ["ScenarioSpec", "PanelTruth", "SCENARIOS", "generate", "fluctuation"]

SCENARIOS = ("fig1", "subspace_selection", "noise_perturbation")

# floor applied to slope integrands that the analytic formulas let go
# nonpositive (the noise_perturbation family), keeping warpings monotone
SLOPE_CLAMP = 0.1


@dataclass(frozen=True)
class ScenarioSpec:
    name: str
    n: int = 30
    m: int = 200
    sigma: float = 0.0
    seed: int = 0

    def __post_init__(self):
        if self.name not in SCENARIOS:
            raise ValueError(f"unknown scenario {self.name!r}; choose from {SCENARIOS}")
        if self.n < 2:
            raise ValueError("need at least 2 observations")
        if self.m < 3:
            raise ValueError("need at least 3 samples")
        if self.sigma < 0.0:
            raise ValueError("sigma must be nonnegative")


@dataclass(frozen=True)
class PanelTruth:
    h: GridFunction
    g: GridFunction
    warpings: list[Warping]


def _normalized_integral_warping(grid: Grid, slope: np.ndarray) -> Warping:
    slope = np.maximum(slope, SLOPE_CLAMP)
    h = grid.spacing
    vals = np.concatenate(([0.0], np.cumsum((slope[1:] + slope[:-1]) * 0.5 * h)))
    return _as_warping(grid, vals / vals[-1])


def _scenario_components(spec: ScenarioSpec, grid: Grid):
    t = grid.points
    n = spec.n
    if spec.name == "fig1":
        h = 1.5 * np.exp(-3.0 * t)
        g = np.cos(10.0 * np.pi * t)
        warps = []
        for i in range(1, n + 1):
            a = -3.0 + 6.0 * i / n
            if abs(a) < 1e-8:
                warps.append(_as_warping(grid, t.copy()))
            else:
                warps.append(_as_warping(grid, np.expm1(a * t) / np.expm1(a)))
    elif spec.name == "subspace_selection":
        h = 0.05 * np.exp(3.0 * t) - 0.5
        g = 5.0 * (0.25 - (t - 0.5) ** 2) * np.sin(5.0 * np.pi * t)
        warps = [
            _normalized_integral_warping(
                grid, (3.0 * np.cos(np.pi * t - 0.5 + i / n)) ** 2 + 0.1
            )
            for i in range(1, n + 1)
        ]
    else:  # noise_perturbation
        h = np.cos(np.pi * t + np.pi / 2.0)
        g = 2.0 * np.exp(-0.8 * (10.0 * t - 7.5) ** 2) + 2.0 * np.exp(
            -0.8 * (10.0 * t - 2.5) ** 2
        )
        warps = []
        for i in range(1, n + 1):
            a = -2.0 + 4.0 * i / n
            warps.append(
                _normalized_integral_warping(
                    grid, 3.0 * np.sin(2.0 * np.pi * a * t) + 2.0 * np.cos(a * t)
                )
            )
    return GridFunction(grid, h), GridFunction(grid, g), warps


def generate(spec: ScenarioSpec) -> tuple[list[GridFunction], PanelTruth]:
    """Build the panel for a named scenario and return it with its truth."""
    grid = Grid.uniform(spec.m)
    h, g, warps = _scenario_components(spec, grid)
    warps, _ = center_warpings(warps)
    rng = np.random.default_rng(spec.seed)
    fs = []
    for gamma in warps:
        noiseless = h + action(g, gamma)
        noise = rng.normal(0.0, spec.sigma, size=grid.m) if spec.sigma > 0 else 0.0
        fs.append(GridFunction(grid, noiseless.values + noise))
    return fs, PanelTruth(h=h, g=g, warpings=warps)


def fluctuation(rates) -> np.ndarray:
    """Percent change between consecutive rates: (R1 - R0) / R0 * 100."""
    rates = np.asarray(rates, dtype=float)
    if rates.ndim != 1 or len(rates) < 2:
        raise ValueError("need at least two rates")
    if np.any(rates <= 0.0):
        raise ValueError("rates must be strictly positive")
    return np.diff(rates) / rates[:-1] * 100.0
