"""Bootstrap replication: confidence bands and trend-shape hypothesis tests.

Whole observations are resampled with replacement (case resampling), the
estimator is rerun on each replicate with the configuration fixed, and
the replicate spread yields pointwise standard errors, normal-quantile
bands, and one-sided p-values for the norm-based test statistics.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.stats import norm as normal_dist

from .estimator import DecompositionResult, EstimatorConfig, decompose
from .gridfn import GridFunction, derivative, inner_product, norm

__all__ = [
    "BootstrapConfig",
    "BootstrapSummary",
    "TestResult",
    "stat_trend_null",
    "stat_trend_constant",
    "stat_trend_linear",
    "TREND_TESTS",
    "bootstrap",
]

MAX_RETRIES = 3
MAX_FAILURE_FRACTION = 0.05


@dataclass(frozen=True)
class BootstrapConfig:
    B: int = 500
    alpha: float = 0.05
    seed: int = 0

    def __post_init__(self):
        if self.B < 2:
            raise ValueError("need at least 2 bootstrap replicates")
        if not 0.0 < self.alpha < 1.0:
            raise ValueError("alpha must lie in (0, 1)")


@dataclass(frozen=True)
class TestResult:
    statistic: float
    se_B: float
    p_value: float


@dataclass(frozen=True)
class BootstrapSummary:
    h_mean: GridFunction
    g_mean: GridFunction
    se_h: GridFunction
    se_g: GridFunction
    band_h_low: GridFunction
    band_h_high: GridFunction
    band_g_low: GridFunction
    band_g_high: GridFunction
    stats: dict
    n_failed: int
    h_replicates: np.ndarray = field(repr=False)
    g_replicates: np.ndarray = field(repr=False)


def stat_trend_null(h: GridFunction) -> float:
    """||h||; zero exactly when there is no trend."""
    return norm(h)


def stat_trend_constant(h: GridFunction) -> float:
    """||h - mean(h)||; zero exactly when the trend is constant."""
    mean = inner_product(h, GridFunction(h.grid, np.ones(h.grid.m)))
    return norm(GridFunction(h.grid, h.values - mean))


def stat_trend_linear(h: GridFunction) -> float:
    """Constancy statistic applied to dh/dt; zero when the trend is linear."""
    return stat_trend_constant(derivative(h))


TREND_TESTS = {
    "trend_null": stat_trend_null,
    "trend_constant": stat_trend_constant,
    "trend_linear": stat_trend_linear,
}


def _one_sided_p(rho: float, se: float) -> float:
    if se <= 0.0:
        return 0.0 if rho > 0.0 else 0.5
    return float(normal_dist.sf(rho / se))


def bootstrap(
    fs: list[GridFunction],
    cfg: EstimatorConfig,
    bcfg: BootstrapConfig,
    original: DecompositionResult | None = None,
) -> BootstrapSummary:
    """Case-resampled bootstrap of the decomposition.

    A replicate whose estimation fails is redrawn up to MAX_RETRIES times;
    the summary errors out if more than MAX_FAILURE_FRACTION of replicates
    fail for good. Pass the decomposition of the original panel to avoid
    recomputing it.
    """
    n = len(fs)
    if n < 2:
        raise ValueError("need at least 2 observations to bootstrap")
    if original is None:
        original = decompose(fs, cfg)

    rng = np.random.default_rng(bcfg.seed)
    grid = fs[0].grid
    h_reps = np.empty((bcfg.B, grid.m))
    g_reps = np.empty((bcfg.B, grid.m))
    rho_reps = {name: np.empty(bcfg.B) for name in TREND_TESTS}
    n_failed = 0

    for b in range(bcfg.B):
        result = None
        for _ in range(1 + MAX_RETRIES):
            idx = rng.integers(0, n, size=n)
            try:
                result = decompose([fs[i] for i in idx], cfg)
                break
            except ValueError:
                continue
        if result is None:
            n_failed += 1
            h_reps[b] = original.h_hat.values
            g_reps[b] = original.g_hat.values
        else:
            h_reps[b] = result.h_hat.values
            g_reps[b] = result.g_hat.values
        hb = GridFunction(grid, h_reps[b])
        for name, stat in TREND_TESTS.items():
            rho_reps[name][b] = stat(hb)

    if n_failed > MAX_FAILURE_FRACTION * bcfg.B:
        raise ValueError(
            f"bootstrap failed: {n_failed}/{bcfg.B} replicates could not be estimated"
        )

    z = float(normal_dist.ppf(1.0 - bcfg.alpha / 2.0))
    h_mean = h_reps.mean(axis=0)
    g_mean = g_reps.mean(axis=0)
    se_h = h_reps.std(axis=0, ddof=1)
    se_g = g_reps.std(axis=0, ddof=1)

    stats = {}
    for name, stat in TREND_TESTS.items():
        rho = stat(original.h_hat)
        se_B = float(rho_reps[name].std(ddof=1))
        stats[name] = TestResult(statistic=rho, se_B=se_B, p_value=_one_sided_p(rho, se_B))

    gf = lambda v: GridFunction(grid, v)
    return BootstrapSummary(
        h_mean=gf(h_mean),
        g_mean=gf(g_mean),
        se_h=gf(se_h),
        se_g=gf(se_g),
        band_h_low=gf(h_mean - z * se_h),
        band_h_high=gf(h_mean + z * se_h),
        band_g_low=gf(g_mean - z * se_g),
        band_g_high=gf(g_mean + z * se_g),
        stats=stats,
        n_failed=n_failed,
        h_replicates=h_reps,
        g_replicates=g_reps,
    )
