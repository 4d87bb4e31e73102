"""Rank-based inference for the nonparametric Behrens-Fisher problem."""

__version__ = "0.1.0"

from ._backend import BACKEND
from .distributions import RngStream
from .estimators import (
    EffectEstimate,
    delong_variance,
    estimate,
    mw_effect,
    tie_probability,
    unbiased_variance,
    variance_ratio,
)
from .inference import (
    TestResult,
    brunner_munzel_test,
    c2_test,
    c2_test_theta0,
    permutation_test,
)
from .intervals import ConfidenceInterval, bk_interval, bm_interval, perm_interval, ratio_interval
from .ranks import Sample, mid_ranks, placements

__all__ = [
    "BACKEND",
    "ConfidenceInterval",
    "EffectEstimate",
    "RngStream",
    "Sample",
    "TestResult",
    "bk_interval",
    "bm_interval",
    "brunner_munzel_test",
    "c2_test",
    "c2_test_theta0",
    "delong_variance",
    "estimate",
    "mid_ranks",
    "mw_effect",
    "perm_interval",
    "permutation_test",
    "placements",
    "ratio_interval",
    "tie_probability",
    "unbiased_variance",
    "variance_ratio",
]
