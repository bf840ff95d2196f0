"""Depth-quantile-function toolkit for anomaly exploration.

From every observation, look outward along sampled pair axes through
growing spherical cones; how slowly mass accumulates around a point is a
function of a scale parameter delta, and the shape of that function
separates isolated points, inliers in density holes, and off-manifold
points from the bulk.  The package computes these curves for Euclidean or
Gram-matrix (kernel) data, scores and ranks observations, generates the
benchmark scenarios, and serves result bundles to an exploration UI.
"""
from __future__ import annotations

__version__ = "0.1.0"

from ._kernels import BACKEND as KERNEL_BACKEND
from .engine import (
    AngleBlock,
    DepthProfile,
    DQFBundle,
    aggregate,
    compute_bundle,
    normalize,
    pair_depth_profile,
    pair_dqf,
    smooth_derivative,
    tip_grid,
)
from .geometry import (
    InnerProductView,
    PairFrame,
    ProjectionStats,
    cone_contains,
    pair_frame,
    projection_stats,
    side_of,
    winsorized_std,
)
from .model import (
    Config,
    Dataset,
    DegeneratePairError,
    DQFError,
    GramMatrix,
    PairPlan,
    ParseError,
    TipDistributionSpec,
    UnsupportedOperationError,
    ValidationError,
    load_dataset,
    load_gram,
    load_labels,
    sample_pairs,
    substream,
    z_scale,
)
from .scoring import (
    AnomalyReport,
    auc,
    build_report,
    rank_first_unique_argmin,
    score_at_delta,
    zero_interval,
)
from .univariate import (
    DQFCurve,
    Sample1D,
    delta_star,
    depth_1d,
    dqf_1d,
    ecdf,
    population_depth_cdf,
    population_dqf,
    shorth,
    zero_run_length_1d,
)

__all__ = [
    "KERNEL_BACKEND",
    "__version__",
    "AngleBlock",
    "AnomalyReport",
    "Config",
    "Dataset",
    "DegeneratePairError",
    "DepthProfile",
    "DQFBundle",
    "DQFCurve",
    "DQFError",
    "GramMatrix",
    "InnerProductView",
    "PairFrame",
    "PairPlan",
    "ParseError",
    "ProjectionStats",
    "Sample1D",
    "TipDistributionSpec",
    "UnsupportedOperationError",
    "ValidationError",
    "aggregate",
    "auc",
    "build_report",
    "compute_bundle",
    "cone_contains",
    "delta_star",
    "depth_1d",
    "dqf_1d",
    "ecdf",
    "load_dataset",
    "load_gram",
    "load_labels",
    "normalize",
    "pair_depth_profile",
    "pair_dqf",
    "pair_frame",
    "population_depth_cdf",
    "population_dqf",
    "projection_stats",
    "rank_first_unique_argmin",
    "sample_pairs",
    "score_at_delta",
    "shorth",
    "side_of",
    "smooth_derivative",
    "substream",
    "tip_grid",
    "winsorized_std",
    "z_scale",
    "zero_interval",
    "zero_run_length_1d",
]
