"""Trend and variable-phase seasonality estimation for functional panels."""

from .basis import BasisFamily, BasisSpec, OrthonormalBasis, build_orthonormal, project, project_complement
from .dpalign import DpConfig, dp_align, dp_align_batch, default_neighborhood
from .estimator import (
    DecompositionResult,
    EstimatorConfig,
    cost,
    decompose,
    select_subspace,
    separation_model,
)
from .gridfn import Grid, GridFunction, derivative, inner_product, mean_function, norm, resample_to_grid
from .inference import BootstrapConfig, BootstrapSummary, bootstrap
from .synthgen import ScenarioSpec, fluctuation, generate
from .warping import (
    Warping,
    action,
    center_warpings,
    compose,
    fisher_rao_distance,
    identity_warping,
    inverse,
    karcher_mean,
)

__version__ = "0.1.0"
