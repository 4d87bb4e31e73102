"""Tests of H0: theta = 1/2 (and theta = theta0) for two independent samples.

Three procedures are provided: the Brunner-Munzel t-approximation, its
studentized permutation version, and the C2 test, which rescales the
squared studentized effect by the estimated ratio of maximal to actual
variance and refers it to chi-square(1).

Degenerate data follow fixed rules:

* fully separated samples (theta_hat in {0, 1}): the Brunner-Munzel
  statistic uses the one-step-back substitution, the C2 test switches to
  the sigma_max statistic ``4 m (theta_hat - 1/2)^2``;
* all observations tied: statistic 0, p-value 1, for every method.
"""

from __future__ import annotations

import itertools
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from . import _backend
from .distributions import RngStream, chi2_1_quantile, chi2_1_sf, t_cdf, t_quantile
from .estimators import (
    DegenerateVariance,
    EffectArrays,
    EffectEstimate,
    _pair,
    effect_arrays,
    estimate,
)
from .intervals import (
    ConfidenceInterval,
    bk_interval,
    bm_interval,
    perm_interval,
    ratio_interval,
)

ONE_STEP_BACK = "one_step_back"
ALL_TIED = "all_tied"
SIGMA_MAX = "sigma_max"

PERM_BLOCK = 1000
EXHAUSTIVE_LIMIT = 200_000


def _check_alpha(alpha):
    if not 0.0 < alpha < 1.0:
        raise ValueError(f"alpha must lie in (0, 1), got {alpha!r}")


@dataclass(frozen=True)
class TestResult:
    """Outcome of one test.

    ``theta_hat`` and ``variance`` are the values the statistic was built
    from, i.e. after any one-step-back substitution. ``variance`` is the
    DeLong estimate for BM/PERM and the unbiased estimate for the C2 family.
    """

    __test__ = False  # not a pytest class

    method: str
    statistic: float
    p_value: float
    alpha: float
    reject: bool
    critical_value: float | None
    theta_hat: float
    variance: float
    estimate: EffectEstimate
    df: float | None = None
    theta0: float = 0.5
    perm_quantiles: tuple[float, float] | None = None
    n_permutations: int | None = None
    seed: int | None = None
    fallback_used: str | None = None

    def confidence_interval(self) -> ConfidenceInterval:
        """The interval compatible with this test at the same ``alpha``."""
        est = self.estimate
        if self.method == "BM":
            return bm_interval(self.theta_hat, self.variance, self.df, est.n, self.alpha)
        if self.method == "PERM":
            if self.fallback_used == ALL_TIED:
                return bm_interval(self.theta_hat, 0.0, None, est.n, self.alpha)
            return perm_interval(
                self.theta_hat, self.variance, est.n, self.perm_quantiles, self.alpha
            )
        if self.fallback_used == SIGMA_MAX:
            return bk_interval(est.theta_hat, est.m, self.alpha)
        return ratio_interval(est.theta_hat, est.var_unbiased, self.alpha, m=est.m)


# --------------------------------------------------------------------------
# Brunner-Munzel building blocks
# --------------------------------------------------------------------------


def satterthwaite_df(svar1, svar2, n1, n2):
    """Satterthwaite-Smith-Welch degrees of freedom.

    ``svar1`` and ``svar2`` are the placement-scale variances
    ``S_i^2 = sum_k (R*_ik - mean R*_i)^2 / (n_i - 1)``, i.e.
    ``(N - n_i)^2`` times the DeLong components. The result is homogeneous
    of degree zero in ``(svar1, svar2)``.
    """
    if n1 < 2 or n2 < 2:
        raise ValueError("each group needs at least 2 observations")
    big_n = n1 + n2
    w1 = np.asarray(svar1, dtype=float) / (big_n - n1)
    w2 = np.asarray(svar2, dtype=float) / (big_n - n2)
    if np.any((w1 < 0) | (w2 < 0)):
        raise ValueError("variances must be non-negative")
    den = w1 * w1 / (n1 - 1) + w2 * w2 / (n2 - 1)
    with np.errstate(invalid="ignore", divide="ignore"):
        df = (w1 + w2) ** 2 / den
    if np.ndim(df) == 0:
        if den == 0:
            raise DegenerateVariance("both variance components are zero")
        return float(df)
    return df


def one_step_back(theta_hat, n1, n2, ties_present):
    """Nearest non-degenerate effect and smallest non-zero DeLong variance.

    Only defined for fully separated samples (``theta_hat`` 0 or 1).
    """
    if theta_hat not in (0.0, 1.0):
        raise ValueError("one-step-back applies only to theta_hat in {0, 1}")
    big_n = n1 + n2
    n12 = n1 * n2
    if ties_present:
        step, var = 1.0 / (2 * n12), big_n / (2.0 * n12 * n12)
    else:
        step, var = 1.0 / n12, 2.0 * big_n / (n12 * n12)
    theta = 1.0 - step if theta_hat == 1.0 else step
    return theta, var


def one_step_back_df(n1, n2):
    """Degrees of freedom of the minimal-overlap configuration behind one-step-back.

    Both groups then have one placement off by the same amount, giving equal
    Satterthwaite weights.
    """
    return 4.0 / (1.0 / (n1 - 1) + 1.0 / (n2 - 1))


class BMArrays(NamedTuple):
    statistic: np.ndarray
    theta: np.ndarray
    variance: np.ndarray
    df: np.ndarray
    separated: np.ndarray
    all_tied: np.ndarray


def bm_arrays(eff: EffectArrays, n1: int, n2: int, ties_present) -> BMArrays:
    """Brunner-Munzel statistic and df for many datasets, degeneracies resolved."""
    big_n = n1 + n2
    theta = eff.theta.copy()
    var = eff.var_delong.copy()
    separated = (theta == 0.0) | (theta == 1.0)
    all_tied = (var == 0.0) & ~separated
    df = satterthwaite_df(
        np.where(all_tied | separated, 1.0, eff.svar1),
        np.where(all_tied | separated, 1.0, eff.svar2),
        n1,
        n2,
    )
    df = np.where(all_tied, np.nan, df)
    if separated.any():
        ties = np.broadcast_to(np.asarray(ties_present, dtype=bool), theta.shape)
        n12 = n1 * n2
        step = np.where(ties, 1.0 / (2 * n12), 1.0 / n12)
        var_osb = np.where(ties, big_n / (2.0 * n12 * n12), 2.0 * big_n / (n12 * n12))
        theta = np.where(separated, np.where(theta == 1.0, 1.0 - step, step), theta)
        var = np.where(separated, var_osb, var)
        df = np.where(separated, one_step_back_df(n1, n2), df)
    with np.errstate(invalid="ignore", divide="ignore"):
        stat = np.where(all_tied, 0.0, math.sqrt(big_n) * (theta - 0.5) / np.sqrt(var))
    return BMArrays(stat, theta, var, df, separated, all_tied)


def _t_crit(df, alpha):
    return t_quantile(1.0 - alpha / 2.0, df)


def bm_reject(bm: BMArrays, alpha: float) -> np.ndarray:
    """``|T| > t_{df, 1 - alpha/2}`` row by row; all-tied rows never reject."""
    out = np.zeros(len(bm.statistic), dtype=bool)
    for i in np.flatnonzero(~bm.all_tied):
        out[i] = abs(bm.statistic[i]) > _t_crit(bm.df[i], alpha)
    return out


def c2_arrays(eff: EffectArrays, n1: int, n2: int, theta0: float = 0.5):
    """C2 (or C2_theta0) statistic and the sigma_max fallback mask."""
    m = min(n1, n2)
    theta = eff.theta
    fallback = (theta == 0.0) | (theta == 1.0) | (eff.var_unbiased == 0.0)
    spread0 = theta0 * (1.0 - theta0)
    dev2 = (theta - theta0) ** 2
    with np.errstate(invalid="ignore", divide="ignore"):
        ratio_stat = theta * (1.0 - theta) * dev2 / (spread0 * eff.var_unbiased)
    stat = np.where(fallback, m * dev2 / spread0, ratio_stat)
    return stat, fallback


# --------------------------------------------------------------------------
# Scalar tests
# --------------------------------------------------------------------------


def _single(s1, s2):
    x1, x2 = _pair(s1, s2, min_size=2)
    est = estimate(x1, x2)
    eff = EffectArrays(
        np.array([est.theta_hat]),
        np.array([est.tau_hat]),
        np.array([est.placement_var1]),
        np.array([est.placement_var2]),
        np.array([est.var_delong]),
        np.array([est.var_unbiased]),
    )
    return x1, x2, est, eff


def brunner_munzel_test(s1, s2, alpha=0.05) -> TestResult:
    """Brunner-Munzel test with a Satterthwaite t reference distribution."""
    _check_alpha(alpha)
    _, _, est, eff = _single(s1, s2)
    bm = bm_arrays(eff, est.n1, est.n2, est.ties_present)
    stat = float(bm.statistic[0])
    fallback = ONE_STEP_BACK if bm.separated[0] else ALL_TIED if bm.all_tied[0] else None
    if fallback == ALL_TIED:
        return TestResult("BM", 0.0, 1.0, alpha, False, None, est.theta_hat, 0.0, est,
                          fallback_used=ALL_TIED)
    df = float(bm.df[0])
    crit = _t_crit(df, alpha)
    p = min(1.0, 2.0 * t_cdf(-abs(stat), df))
    return TestResult(
        "BM", stat, p, alpha, abs(stat) > crit, crit, float(bm.theta[0]),
        float(bm.variance[0]), est, df=df, fallback_used=fallback,
    )


def c2_test_theta0(s1, s2, theta0=0.5, alpha=0.05) -> TestResult:
    """C2-type test of ``theta = theta0`` for ``0 < theta0 < 1``."""
    _check_alpha(alpha)
    if not 0.0 < theta0 < 1.0:
        raise ValueError("theta0 must lie strictly between 0 and 1")
    _, _, est, eff = _single(s1, s2)
    stat, fallback = c2_arrays(eff, est.n1, est.n2, theta0)
    stat = float(stat[0])
    fallback = bool(fallback[0])
    crit = chi2_1_quantile(1.0 - alpha)
    return TestResult(
        "C2_THETA0", stat, chi2_1_sf(stat), alpha, stat > crit, crit, est.theta_hat,
        est.var_unbiased, est, theta0=theta0, fallback_used=SIGMA_MAX if fallback else None,
    )


def c2_test(s1, s2, alpha=0.05) -> TestResult:
    """C2 test of ``theta = 1/2`` with the sigma_max fallback for degenerate data."""
    res = c2_test_theta0(s1, s2, 0.5, alpha)
    if res.estimate.all_tied:
        return TestResult("C2", 0.0, 1.0, alpha, False, res.critical_value, res.theta_hat,
                          0.0, res.estimate, fallback_used=ALL_TIED)
    method = "C2_SIGMA_MAX" if res.fallback_used else "C2"
    return TestResult(
        method, res.statistic, res.p_value, alpha, res.reject, res.critical_value,
        res.theta_hat, res.variance, res.estimate, fallback_used=res.fallback_used,
    )


# --------------------------------------------------------------------------
# Studentized permutation test
# --------------------------------------------------------------------------


def permuted_statistics(blocks, labels, n1, n2, ties_present, backend=None):
    """Brunner-Munzel statistics for a batch of relabellings of sorted data."""
    moments = _backend.block_moments(blocks, labels, backend)
    eff = effect_arrays(moments, n1, n2)
    return bm_arrays(eff, n1, n2, ties_present).statistic


def random_labels(rng, base_labels, count):
    """``count`` uniformly random relabellings (rows) of ``base_labels``."""
    return rng.permuted(np.tile(base_labels, (count, 1)), axis=1)


def all_labels(n1, n2):
    """Every assignment of group-2 membership, as rows."""
    big_n = n1 + n2
    combos = list(itertools.combinations(range(big_n), n2))
    out = np.zeros((len(combos), big_n), dtype=np.uint8)
    rows = np.repeat(np.arange(len(combos)), n2)
    out[rows, np.asarray(combos, dtype=np.int64).ravel()] = 1
    return out


def permutation_p_value(t_obs, t_perm):
    """Two-sided p-value; permuted statistics equal to ``t_obs`` count in neither tail."""
    t_perm = np.asarray(t_perm)
    below = np.count_nonzero(t_perm < t_obs) / len(t_perm)
    above = np.count_nonzero(t_perm > t_obs) / len(t_perm)
    return min(1.0, 2.0 * min(below, above))


def permutation_test(
    s1, s2, alpha=0.05, n_p=10_000, seed=0, exhaustive=False, workers=1, backend=None
) -> TestResult:
    """Studentized permutation test built on the Brunner-Munzel statistic.

    Random relabellings are drawn in blocks of ``PERM_BLOCK``, block ``k``
    from ``RngStream(seed, k)``, so the result depends only on
    ``(seed, n_p)`` and not on ``workers``. With ``exhaustive=True`` all
    ``C(N, n1)`` assignments are enumerated instead (limited to 200,000).
    """
    _check_alpha(alpha)
    x1, x2, est, eff = _single(s1, s2)
    n1, n2 = est.n1, est.n2
    bm = bm_arrays(eff, n1, n2, est.ties_present)
    t_obs = float(bm.statistic[0])
    theta_used, var_used = float(bm.theta[0]), float(bm.variance[0])
    if bm.all_tied[0]:
        return TestResult("PERM", 0.0, 1.0, alpha, False, None, theta_used, 0.0, est,
                          perm_quantiles=(0.0, 0.0), n_permutations=0,
                          seed=None if exhaustive else seed,
                          fallback_used=ALL_TIED)

    blocks, labels = _backend.sorted_blocks(np.concatenate([x1, x2]), n1)
    if exhaustive:
        if math.comb(n1 + n2, n1) > EXHAUSTIVE_LIMIT:
            raise ValueError("too many assignments for exhaustive enumeration")
        t_perm = permuted_statistics(blocks, all_labels(n1, n2), n1, n2, est.ties_present, backend)
        seed_used = None
    else:
        if n_p < 1:
            raise ValueError("n_p must be at least 1")

        def run_block(k):
            count = min(PERM_BLOCK, n_p - k * PERM_BLOCK)
            rng = RngStream(seed, k).generator()
            lab = random_labels(rng, labels[0], count)
            return permuted_statistics(blocks, lab, n1, n2, est.ties_present, backend)

        n_blocks = -(-n_p // PERM_BLOCK)
        if workers > 1:
            with ThreadPoolExecutor(max_workers=workers) as pool:
                parts = list(pool.map(run_block, range(n_blocks)))
        else:
            parts = [run_block(k) for k in range(n_blocks)]
        t_perm = np.concatenate(parts)
        seed_used = seed

    p = permutation_p_value(t_obs, t_perm)
    q_lo, q_hi = np.quantile(t_perm, [alpha / 2.0, 1.0 - alpha / 2.0])
    return TestResult(
        "PERM", t_obs, p, alpha, p < alpha, None, theta_used, var_used, est,
        perm_quantiles=(float(q_lo), float(q_hi)), n_permutations=len(t_perm),
        seed=seed_used, fallback_used=ONE_STEP_BACK if bm.separated[0] else None,
    )
