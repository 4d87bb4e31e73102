"""Point and variance estimation for the Mann-Whitney effect.

Scales follow the usual conventions: the DeLong estimate ``var_delong`` is
for ``sqrt(N) * theta_hat`` while ``var_unbiased`` is for ``theta_hat``
itself. Multiply the latter by ``N`` to compare the two.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from . import _backend
from .ranks import as_values, placements


def _pair(s1, s2, min_size=1):
    x1 = as_values(s1, "sample 1")
    x2 = as_values(s2, "sample 2")
    if min(len(x1), len(x2)) < min_size:
        raise ValueError(f"each group needs at least {min_size} observations")
    return x1, x2


# --------------------------------------------------------------------------
# Rank-formula estimators
# --------------------------------------------------------------------------


def mw_effect(s1, s2) -> float:
    """``theta_hat = (mean pooled rank of group 2 - (n2 + 1)/2) / n1``."""
    ranks = placements(*_pair(s1, s2))
    n1, n2 = ranks.n1, ranks.n2
    return float((ranks.pooled_mid[1].mean() - (n2 + 1) / 2) / n1)


def tie_probability(s1, s2) -> float:
    """Estimated probability of a tie between one observation of each group."""
    ranks = placements(*_pair(s1, s2))
    pooled = ranks.pooled_max[1].mean() - ranks.pooled_min[1].mean()
    internal = ranks.internal_max[1].mean() - ranks.internal_min[1].mean()
    return float((pooled - internal) / ranks.n1)


def _placement_ss(ranks):
    return [float(np.sum((p - p.mean()) ** 2)) for p in ranks.placements]


def delong_variance(s1, s2) -> tuple[float, float, float]:
    """DeLong variance estimate ``v_DL^2`` and its components.

    Returns ``(v_DL^2, sigma1^2, sigma2^2)`` with
    ``sigma_i^2 = sum_k (R*_ik - mean R*_i)^2 / ((n_i - 1) (N - n_i)^2)``
    and ``v_DL^2 = N (sigma1^2 / n1 + sigma2^2 / n2)``.
    """
    ranks = placements(*_pair(s1, s2, min_size=2))
    n1, n2 = ranks.n1, ranks.n2
    big_n = n1 + n2
    ss1, ss2 = _placement_ss(ranks)
    sigma1 = ss1 / ((n1 - 1) * n2**2)
    sigma2 = ss2 / ((n2 - 1) * n1**2)
    return big_n * (sigma1 / n1 + sigma2 / n2), sigma1, sigma2


def unbiased_variance(s1, s2) -> float:
    """Unbiased rank-based estimate of ``Var(theta_hat)``; never negative."""
    ranks = placements(*_pair(s1, s2, min_size=2))
    n1, n2 = ranks.n1, ranks.n2
    theta = (ranks.pooled_mid[1].mean() - (n2 + 1) / 2) / n1
    tau = (
        ranks.pooled_max[1].mean()
        - ranks.pooled_min[1].mean()
        - (ranks.internal_max[1].mean() - ranks.internal_min[1].mean())
    ) / n1
    d_n = n1 * (n1 - 1) * n2 * (n2 - 1)
    bracket = sum(_placement_ss(ranks)) - n1 * n2 * (theta * (1 - theta) - tau / 4)
    return max(float(bracket), 0.0) / d_n


def bk_bounds(theta: float, m: int) -> tuple[float, float]:
    """Birnbaum-Klose bound ``theta(1-theta)/m`` and its empirical form ``/(m-1)``."""
    if not 0.0 <= theta <= 1.0:
        raise ValueError("theta must lie in [0, 1]")
    if m < 2:
        raise ValueError("the empirical bound needs m >= 2")
    spread = theta * (1.0 - theta)
    return spread / m, spread / (m - 1)


class DegenerateVariance(ValueError):
    """Raised when a variance-based quantity is undefined for the data at hand."""


def variance_ratio(theta_hat: float, var_unbiased: float, m: int) -> float:
    """Estimated ratio of the maximal to the actual variance of ``theta_hat``."""
    if var_unbiased <= 0.0 or not 0.0 < theta_hat < 1.0:
        raise DegenerateVariance("ratio undefined: use the sigma_max path")
    return theta_hat * (1.0 - theta_hat) / (m * var_unbiased)


# --------------------------------------------------------------------------
# Kernel path (exact integer moments)
# --------------------------------------------------------------------------


class EffectArrays(NamedTuple):
    """Vectorised estimates for many labelled datasets of equal sizes."""

    theta: np.ndarray
    tau: np.ndarray
    svar1: np.ndarray  # placement-scale variance of group 1 placements
    svar2: np.ndarray
    var_delong: np.ndarray
    var_unbiased: np.ndarray


def effect_arrays(moments: np.ndarray, n1: int, n2: int) -> EffectArrays:
    """Turn kernel moments into estimates.

    Variance numerators are formed in integer arithmetic so zero variances
    are detected exactly.
    """
    big_n = n1 + n2
    if 8 * n1**2 * n2**2 * max(n1, n2) < 2**62:
        mom = np.asarray(moments, dtype=np.int64)
    else:
        mom = np.asarray(moments).astype(object)
    p1, q1, p2, q2, ties = (mom[:, j] for j in range(5))
    nq1 = n1 * q1 - p1 * p1  # 4 n1 * sum of squared placement deviations
    nq2 = n2 * q2 - p2 * p2
    n12 = n1 * n2
    num = n2 * nq1 + n1 * nq2 - p2 * (2 * n12 - p2) + n12 * ties

    theta = (p2 / (2.0 * n12)).astype(np.float64)
    tau = (ties / float(n12)).astype(np.float64)
    svar1 = (nq1 / (4.0 * n1 * (n1 - 1))).astype(np.float64) if n1 > 1 else np.full(len(mom), np.nan)
    svar2 = (nq2 / (4.0 * n2 * (n2 - 1))).astype(np.float64) if n2 > 1 else np.full(len(mom), np.nan)
    sigma1 = svar1 / n2**2
    sigma2 = svar2 / n1**2
    var_delong = big_n * (sigma1 / n1 + sigma2 / n2)
    d_n = n1 * (n1 - 1) * n2 * (n2 - 1)
    if d_n > 0:
        clipped = np.where(num > 0, num, 0)
        var_unbiased = (clipped / (4.0 * n12 * d_n)).astype(np.float64)
    else:
        var_unbiased = np.full(len(mom), np.nan)
    return EffectArrays(theta, tau, svar1, svar2, var_delong, var_unbiased)


@dataclass(frozen=True)
class EffectEstimate:
    """Effect, tie probability and both variance estimates for one dataset."""

    theta_hat: float
    tau_hat: float
    var_delong: float
    var_unbiased: float
    sigma1_sq: float
    sigma2_sq: float
    placement_var1: float
    placement_var2: float
    n1: int
    n2: int
    ties_present: bool

    @property
    def n(self) -> int:
        return self.n1 + self.n2

    @property
    def m(self) -> int:
        return min(self.n1, self.n2)

    @property
    def separated(self) -> bool:
        return self.theta_hat in (0.0, 1.0)

    @property
    def all_tied(self) -> bool:
        return self.var_delong == 0.0 and not self.separated

    @property
    def degenerate(self) -> bool:
        return self.separated or self.var_unbiased == 0.0 or self.var_delong == 0.0

    @property
    def n_var_unbiased(self) -> float:
        """``N * var_unbiased``, directly comparable with ``var_delong``."""
        return self.n * self.var_unbiased


def estimate(s1, s2) -> EffectEstimate:
    """All point and variance estimates for two samples (each of size >= 2)."""
    x1, x2 = _pair(s1, s2, min_size=2)
    n1, n2 = len(x1), len(x2)
    blocks, labels = _backend.sorted_blocks(np.concatenate([x1, x2]), n1)
    arr = effect_arrays(_backend.block_moments(blocks, labels), n1, n2)
    return EffectEstimate(
        theta_hat=float(arr.theta[0]),
        tau_hat=float(arr.tau[0]),
        var_delong=float(arr.var_delong[0]),
        var_unbiased=float(arr.var_unbiased[0]),
        sigma1_sq=float(arr.svar1[0]) / n2**2,
        sigma2_sq=float(arr.svar2[0]) / n1**2,
        placement_var1=float(arr.svar1[0]),
        placement_var2=float(arr.svar2[0]),
        n1=n1,
        n2=n2,
        ties_present=bool(blocks[0, -1] < n1 + n2 - 1),
    )
