import itertools
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from npbehrens import _backend
from npbehrens.estimators import (
    DegenerateVariance,
    bk_bounds,
    delong_variance,
    effect_arrays,
    estimate,
    mw_effect,
    tie_probability,
    unbiased_variance,
    variance_ratio,
)
from conftest import TOY_GROUP1, TOY_GROUP2
from oracles import (
    fuzz_pair,
    pairwise_delong,
    pairwise_tau,
    pairwise_theta,
    ustat_unbiased_variance,
)

sample = st.lists(st.integers(0, 5).map(float), min_size=2, max_size=12)


def test_mw_effect_examples():
    assert mw_effect([1, 2, 3], [1, 2, 3]) == 0.5
    assert mw_effect([1, 2], [3, 4]) == 1.0
    assert mw_effect(TOY_GROUP1, TOY_GROUP2) == pytest.approx(14 / 70)
    assert mw_effect(TOY_GROUP2, TOY_GROUP1) == pytest.approx(0.8)


def test_tie_probability_examples(shoulder):
    assert tie_probability([1, 2], [3, 4]) == 0.0
    assert tie_probability([1, 1], [1, 2]) == 0.5
    assert tie_probability(*shoulder) == pytest.approx(0.182, abs=5e-4)


def test_delong_variance_examples(shoulder):
    v, s1, s2 = delong_variance(*shoulder)
    assert v == pytest.approx(0.172, abs=5e-4)
    assert delong_variance([1, 2], [3, 4])[0] == 0.0
    assert delong_variance([1, 1], [1, 1])[0] == 0.0


def test_unbiased_variance_examples(shoulder):
    assert 41 * unbiased_variance(*shoulder) == pytest.approx(0.171, abs=5e-4)
    assert unbiased_variance([1, 2], [3, 4]) == 0.0


def test_bk_bounds_examples():
    assert bk_bounds(0.5, 10)[0] == pytest.approx(0.025)
    assert bk_bounds(0.0, 5) == (0.0, 0.0)
    assert bk_bounds(1.0, 5) == (0.0, 0.0)
    assert bk_bounds(0.837, 19)[0] == pytest.approx(0.837 * 0.163 / 19)
    with pytest.raises(ValueError):
        bk_bounds(0.5, 1)


def test_variance_ratio_examples(shoulder):
    assert variance_ratio(0.3, 0.3 * 0.7 / 12, 12) == pytest.approx(1.0)
    assert variance_ratio(0.5, 0.0125, 10) == pytest.approx(2.0)
    assert variance_ratio(0.837, 0.171 / 41, 19) == pytest.approx(0.837 * 0.163 * 41 / (19 * 0.171))
    est = estimate(*shoulder)
    assert variance_ratio(est.theta_hat, est.var_unbiased, est.m) > 1.0
    with pytest.raises(DegenerateVariance):
        variance_ratio(1.0, 0.01, 5)
    with pytest.raises(DegenerateVariance):
        variance_ratio(0.4, 0.0, 5)


@given(sample, sample)
@settings(max_examples=300, deadline=None)
def test_rank_and_kernel_paths_match_pairwise_oracles(a, b):
    est = estimate(a, b)
    assert mw_effect(a, b) == pytest.approx(pairwise_theta(a, b), abs=1e-12)
    assert est.theta_hat == pytest.approx(pairwise_theta(a, b), abs=1e-12)
    assert tie_probability(a, b) == pytest.approx(pairwise_tau(a, b), abs=1e-12)
    assert est.tau_hat == pytest.approx(pairwise_tau(a, b), abs=1e-12)
    v, s1, s2 = pairwise_delong(a, b)
    assert delong_variance(a, b) == pytest.approx((v, s1, s2), abs=1e-12)
    assert est.var_delong == pytest.approx(v, abs=1e-12)
    u = max(ustat_unbiased_variance(a, b), 0.0)
    assert unbiased_variance(a, b) == pytest.approx(u, abs=1e-12)
    assert est.var_unbiased == pytest.approx(u, abs=1e-12)


@given(sample, sample)
@settings(max_examples=200, deadline=None)
def test_estimates_symmetric_under_swap(a, b):
    e, f = estimate(a, b), estimate(b, a)
    assert f.theta_hat == pytest.approx(1 - e.theta_hat, abs=1e-15)
    assert f.tau_hat == e.tau_hat
    assert f.var_delong == pytest.approx(e.var_delong, abs=1e-15)
    assert f.var_unbiased == pytest.approx(e.var_unbiased, abs=1e-15)


def test_empirical_bk_bound_on_fuzzed_data():
    rng = np.random.default_rng(3)
    for _ in range(2000):
        n1, n2 = rng.integers(2, 13, 2)
        est = estimate(*fuzz_pair(rng, n1, n2))
        assert 0.0 <= est.var_unbiased <= est.theta_hat * (1 - est.theta_hat) / (est.m - 1) + 1e-15


def test_separation_characterisation():
    rng = np.random.default_rng(8)
    for _ in range(2000):
        n1, n2 = rng.integers(2, 7, 2)
        a, b = fuzz_pair(rng, n1, n2)
        est = estimate(a, b)
        separated = a.max() < b.min() or b.max() < a.min()
        assert separated == (est.theta_hat in (0.0, 1.0))
        assert separated == (est.var_unbiased == 0.0 and est.var_delong == 0.0 and not est.all_tied)


def test_unbiased_variance_exact_expectation():
    """Exact enumeration over two discrete laws: E[sigma2_hat] = Var(theta_hat)."""
    p1 = [Fraction(1, 2), Fraction(1, 3), Fraction(1, 6)]
    p2 = [Fraction(1, 5), Fraction(2, 5), Fraction(2, 5)]
    n1, n2 = 2, 3
    data, weights = [], []
    for x1 in itertools.product(range(3), repeat=n1):
        for x2 in itertools.product(range(3), repeat=n2):
            data.append(x1 + x2)
            w = Fraction(1)
            for v in x1:
                w *= p1[v]
            for v in x2:
                w *= p2[v]
            weights.append(w)
    blocks, labels = _backend.sorted_blocks(np.array(data, float), n1)
    arr = effect_arrays(_backend.block_moments(blocks, labels), n1, n2)
    w = np.array([float(x) for x in weights])
    mean_theta = float(np.dot(w, arr.theta))
    var_theta = float(np.dot(w, (arr.theta - mean_theta) ** 2))
    assert np.all(arr.var_unbiased >= 0)
    assert float(np.dot(w, arr.var_unbiased)) == pytest.approx(var_theta, rel=1e-12)


def test_estimate_fields(shoulder):
    est = estimate(*shoulder)
    assert est.n == 41 and est.m == 19
    assert est.ties_present
    assert not est.degenerate
    assert est.sigma1_sq == pytest.approx(est.placement_var1 / est.n2**2)
    assert est.n_var_unbiased == pytest.approx(41 * est.var_unbiased)
    flat = estimate([1, 1], [1, 1])
    assert flat.all_tied and flat.degenerate and flat.theta_hat == 0.5 and flat.tau_hat == 1.0


def test_small_groups_rejected():
    with pytest.raises(ValueError):
        estimate([1.0], [1.0, 2.0])
    with pytest.raises(ValueError):
        delong_variance([1.0, 2.0], [3.0])
