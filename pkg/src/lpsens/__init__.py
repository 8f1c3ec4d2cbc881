"""Exact and approximate lp sensitivities of tall dense matrices.

The sensitivity of a row measures the largest fraction of the lp objective
that row can claim.  This package computes sensitivities exactly (leverage
scores for p = 2, small linear programs for p = 1, smoothed reweighted
least squares otherwise) and estimates them fast via Lewis-weight sampling:
per-row estimates, total-sensitivity estimates, max-sensitivity estimates,
and reductions that answer lp regression through sensitivity calls.
"""

from .core import (
    NonConvergenceError,
    RandomSource,
    RankDeficientError,
    WeightVector,
    as_matrix,
    as_vector,
    lp_norm,
    matrix_rank,
)
from .embed import (
    SamplingEmbedding,
    inclusion_probabilities,
    linf_embedding,
    lp_embedding,
)
from .leverage import leverage_approx, leverage_exact
from .lewis import LewisConfig, lewis_weights
from .maxsens import MaxSensitivityResult, max_sensitivity
from .reduce import (
    default_anchor_scale,
    leave_one_out_multiregression,
    regression_via_sensitivity,
)
from .regress import (
    RegressionSolution,
    min_lp_on_hyperplane,
    sensitivities_exact,
    sensitivities_wrt,
    sensitivity_one,
)
from .report import SensitivityReport
from .rowwise import RowwiseConfig, RowwiseResult, sensitivities_rowwise
from .total import (
    OneShotTotal,
    TotalConfig,
    bounded_ratio_mean,
    total_lewis_oneshot,
    total_recursive_l1,
)

__version__ = "0.1.0"

__all__ = [
    "LewisConfig",
    "MaxSensitivityResult",
    "NonConvergenceError",
    "OneShotTotal",
    "RandomSource",
    "RankDeficientError",
    "RegressionSolution",
    "RowwiseConfig",
    "RowwiseResult",
    "SamplingEmbedding",
    "SensitivityReport",
    "TotalConfig",
    "WeightVector",
    "as_matrix",
    "as_vector",
    "bounded_ratio_mean",
    "default_anchor_scale",
    "inclusion_probabilities",
    "leave_one_out_multiregression",
    "leverage_approx",
    "leverage_exact",
    "lewis_weights",
    "linf_embedding",
    "lp_embedding",
    "lp_norm",
    "matrix_rank",
    "max_sensitivity",
    "min_lp_on_hyperplane",
    "regression_via_sensitivity",
    "sensitivities_exact",
    "sensitivities_rowwise",
    "sensitivities_wrt",
    "sensitivity_one",
    "total_lewis_oneshot",
    "total_recursive_l1",
    "__version__",
]
