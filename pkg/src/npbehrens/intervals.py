"""Confidence intervals for the Mann-Whitney effect that agree with the tests.

Each interval excludes 1/2 exactly when its test rejects. The ratio and
Birnbaum-Klose intervals always stay inside [0, 1]; the Brunner-Munzel and
permutation intervals may not, and are reported unclamped.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .distributions import chi2_1_quantile, t_quantile


@dataclass(frozen=True)
class ConfidenceInterval:
    lower: float
    upper: float
    level: float
    method: str  # BM, PERM, RATIO or BK
    range_preserving: bool
    q_hat: float | None = None

    @property
    def exceeds_unit_range(self) -> bool:
        return self.lower < 0.0 or self.upper > 1.0

    def contains(self, theta: float) -> bool:
        return self.lower <= theta <= self.upper


def _check_alpha(alpha):
    if not 0.0 < alpha < 1.0:
        raise ValueError(f"alpha must lie in (0, 1), got {alpha!r}")


def bm_interval(theta_hat, var_delong, df, n, alpha=0.05) -> ConfidenceInterval:
    """``theta_hat -/+ t_{df, 1-alpha/2} * sqrt(var_delong / n)``.

    A zero variance (all observations tied) yields the point interval.
    """
    _check_alpha(alpha)
    if var_delong < 0:
        raise ValueError("variance must be non-negative")
    if var_delong == 0.0:
        half = 0.0
    else:
        if not df > 0:
            raise ValueError("degrees of freedom must be positive")
        half = t_quantile(1.0 - alpha / 2.0, df) * math.sqrt(var_delong / n)
    return ConfidenceInterval(theta_hat - half, theta_hat + half, 1.0 - alpha, "BM", False)


def perm_interval(theta_hat, var_delong, n, perm_quantiles, alpha=0.05) -> ConfidenceInterval:
    """Interval from the empirical ``alpha/2`` and ``1 - alpha/2`` permutation quantiles."""
    _check_alpha(alpha)
    q_lo, q_hi = perm_quantiles
    scale = math.sqrt(var_delong / n)
    return ConfidenceInterval(
        theta_hat - q_hi * scale, theta_hat - q_lo * scale, 1.0 - alpha, "PERM", False
    )


def ratio_bounds(theta, var_unbiased, crit):
    """Vectorised roots of ``(theta_hat - t)^2 = q_hat * crit * t (1 - t)``."""
    theta = np.asarray(theta, dtype=float)
    var = np.asarray(var_unbiased, dtype=float)
    q = var / (theta * (1.0 - theta))
    qc = q * crit
    root = np.sqrt(qc * qc + 4.0 * var * crit)
    denom = 2.0 * (1.0 + qc)
    return (2.0 * theta + qc - root) / denom, (2.0 * theta + qc + root) / denom, q


def bk_bounds_ci(theta, m, crit):
    """Vectorised roots of ``(theta_hat - t)^2 = crit * t (1 - t) / m``.

    At ``theta_hat`` of exactly 0 or 1 the one-sided closed forms are used.
    """
    theta = np.asarray(theta, dtype=float)
    root = np.sqrt(4.0 * m * theta * (1.0 - theta) * crit + crit * crit)
    denom = 2.0 * (m + crit)
    lower = (2.0 * m * theta + crit - root) / denom
    upper = (2.0 * m * theta + crit + root) / denom
    lower = np.where(theta == 0.0, 0.0, np.where(theta == 1.0, m / (m + crit), lower))
    upper = np.where(theta == 1.0, 1.0, np.where(theta == 0.0, crit / (m + crit), upper))
    return lower, upper


def bk_interval(theta_hat, m, alpha=0.05) -> ConfidenceInterval:
    """Interval replacing the variance by its Birnbaum-Klose maximum ``theta(1-theta)/m``."""
    _check_alpha(alpha)
    if m < 1:
        raise ValueError("m must be at least 1")
    if not 0.0 <= theta_hat <= 1.0:
        raise ValueError("theta_hat must lie in [0, 1]")
    lo, hi = bk_bounds_ci(theta_hat, m, chi2_1_quantile(1.0 - alpha))
    return ConfidenceInterval(float(lo), float(hi), 1.0 - alpha, "BK", True)


def ratio_interval(theta_hat, var_unbiased, alpha=0.05, m=None) -> ConfidenceInterval:
    """Range-preserving interval compatible with the C2 test.

    Falls back to :func:`bk_interval` when ``theta_hat`` is 0 or 1 or the
    variance is zero; ``m`` (the smaller group size) is then required.
    """
    _check_alpha(alpha)
    if var_unbiased <= 0.0 or not 0.0 < theta_hat < 1.0:
        if m is None:
            raise ValueError("degenerate ratio interval: pass m to use the Birnbaum-Klose bound")
        return bk_interval(theta_hat, m, alpha)
    lo, hi, q = ratio_bounds(theta_hat, var_unbiased, chi2_1_quantile(1.0 - alpha))
    return ConfidenceInterval(float(lo), float(hi), 1.0 - alpha, "RATIO", True, float(q))
