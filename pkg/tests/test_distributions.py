import math

import mpmath
import numpy as np
import pytest
from scipy import special, stats

from npbehrens import distributions as D

P_GRID = np.concatenate([np.geomspace(1e-6, 0.5, 40), 1 - np.geomspace(1e-6, 0.5, 40)[::-1]])
DF_GRID = [0.5, 1.0, 1.7, 2.0, 3.5, 7.0, 13.2, 26.488, 60.0, 250.0, 1e3, 1e4, 1e5, 1e6]


def test_normal_examples():
    assert D.normal_cdf(0.0) == 0.5
    assert D.normal_quantile(0.975) == pytest.approx(1.959964, abs=5e-7)
    for x in (0.3, 1.7, 4.2):
        assert D.normal_cdf(-x) + D.normal_cdf(x) == pytest.approx(1.0, abs=1e-15)


def test_normal_cdf_against_high_precision():
    mpmath.mp.dps = 40
    for x in np.linspace(-8, 8, 161):
        exact = float(mpmath.ncdf(x))
        assert abs(D.normal_cdf(x) - exact) <= 1e-14


def test_normal_round_trip():
    for p in P_GRID:
        assert abs(D.normal_cdf(D.normal_quantile(p)) - p) <= 1e-12


@pytest.mark.parametrize("p", [0.0, 1.0, -0.1, 1.5])
def test_normal_quantile_domain(p):
    with pytest.raises(ValueError):
        D.normal_quantile(p)


def test_t_examples():
    assert D.t_quantile(0.975, 1) == pytest.approx(12.7062, abs=5e-5)
    assert D.t_quantile(0.975, 1) == pytest.approx(math.tan(math.pi * 0.475), rel=1e-12)
    for df in DF_GRID:
        assert D.t_cdf(0.0, df) == 0.5
    assert D.t_quantile(0.975, 1e6) == pytest.approx(D.normal_quantile(0.975), abs=1e-4)


def test_t_cdf_against_scipy():
    for df in DF_GRID:
        for x in np.concatenate([-np.geomspace(1e-3, 1e3, 25), np.geomspace(1e-3, 1e3, 25)]):
            ref = stats.t.cdf(x, df)
            assert D.t_cdf(x, df) == pytest.approx(ref, rel=1e-10, abs=1e-14)
            assert D.t_sf(x, df) == pytest.approx(stats.t.sf(x, df), rel=1e-10, abs=1e-14)


def test_t_round_trip():
    for df in DF_GRID:
        for p in P_GRID:
            q = D.t_quantile(p, df)
            assert abs(D.t_cdf(q, df) - p) <= 1e-10
            assert q == pytest.approx(stats.t.ppf(p, df), rel=1e-9)


def test_t_converges_to_normal():
    for x in (-2.5, -1.0, 0.4, 1.96):
        assert D.t_cdf(x, 1e7) == pytest.approx(D.normal_cdf(x), abs=1e-7)


@pytest.mark.parametrize("df", [0.0, -1.0, float("nan")])
def test_t_df_domain(df):
    with pytest.raises(ValueError):
        D.t_cdf(1.0, df)
    with pytest.raises(ValueError):
        D.t_quantile(0.5, df)


def test_betainc_against_scipy():
    rng = np.random.default_rng(2)
    for _ in range(500):
        a, b = np.exp(rng.uniform(-2, 5, 2))
        x = rng.uniform()
        assert D.betainc(a, b, x) == pytest.approx(special.betainc(a, b, x), rel=1e-10, abs=1e-14)
    assert D.beta_cdf(0.3, 1, 1) == pytest.approx(0.3)
    assert D.beta_cdf(0.0, 2, 5) == 0.0 and D.beta_cdf(1.0, 2, 5) == 1.0


def test_chi2_examples():
    assert D.chi2_1_quantile(0.95) == pytest.approx(3.8415, abs=5e-5)
    assert D.chi2_1_quantile(0.95) == pytest.approx(D.normal_quantile(0.975) ** 2, rel=1e-15)
    assert D.chi2_1_cdf(0.0) == 0.0
    assert D.chi2_1_quantile(0.99) == pytest.approx(6.6349, abs=5e-5)
    for x in (0.01, 1.0, 3.84, 20.0):
        assert D.chi2_1_cdf(x) == pytest.approx(2 * D.normal_cdf(math.sqrt(x)) - 1, abs=1e-15)
        assert D.chi2_1_sf(x) == pytest.approx(stats.chi2.sf(x, 1), rel=1e-12)
    with pytest.raises(ValueError):
        D.chi2_1_cdf(-1.0)


def test_chi2_round_trip():
    for p in P_GRID:
        assert abs(D.chi2_1_cdf(D.chi2_1_quantile(p)) - p) <= 1e-12


# --------------------------------------------------------------------------
# streams and samplers
# --------------------------------------------------------------------------


def test_streams_are_reproducible_and_distinct():
    a = D.RngStream(7, 3).generator().random(5)
    b = D.RngStream(7, 3).generator().random(5)
    c = D.RngStream(7, 4).generator().random(5)
    d = D.RngStream(8, 3).generator().random(5)
    e = D.RngStream(7, 3).child(1).generator().random(5)
    np.testing.assert_array_equal(a, b)
    for other in (c, d, e):
        assert not np.array_equal(a, other)
    with pytest.raises(ValueError):
        D.RngStream(-1)


def test_streams_look_independent():
    x = np.concatenate([D.RngStream(1, k).generator().random(100) for k in range(200)])
    y = np.concatenate([D.RngStream(1, k + 1).generator().random(100) for k in range(200)])
    assert abs(np.corrcoef(x, y)[0, 1]) < 0.02


N_GOF = 100_000
CONTINUOUS = [
    ("normal", (0.0, 1.0), stats.norm()),
    ("normal", (2.0, 9.0), stats.norm(2, 3)),
    ("beta", (1.0, 1.0), stats.beta(1, 1)),
    ("beta", (5.0, 5.0), stats.beta(5, 5)),
    ("beta", (2.0, 5.0), stats.beta(2, 5)),
    ("beta", (0.3, 0.7), stats.beta(0.3, 0.7)),
    ("exponential", (1.0,), stats.expon()),
    ("exponential", (4.0,), stats.expon(scale=0.25)),
    ("laplace", (0.0, 1.0), stats.laplace()),
    ("laplace", (0.0, 3.0), stats.laplace(scale=3)),
]


@pytest.mark.parametrize("family,params,ref", CONTINUOUS, ids=lambda v: str(v))
def test_continuous_samplers_pass_ks(family, params, ref):
    x = D.sample(family, params, N_GOF, D.RngStream(20, 1))
    assert stats.kstest(x, ref.cdf).pvalue > 1e-6


@pytest.mark.parametrize("lam", [1.0, 3.5, 25.0])
def test_poisson_sampler_passes_chi_square(lam):
    x = D.sample("poisson", (lam,), N_GOF, D.RngStream(21, 2))
    assert np.all(x == np.round(x)) and x.min() >= 0
    top = int(stats.poisson.ppf(1 - 1e-4, lam))
    observed = np.bincount(np.minimum(x.astype(int), top), minlength=top + 1)
    probs = stats.poisson.pmf(np.arange(top + 1), lam)
    probs[-1] = stats.poisson.sf(top - 1, lam)
    assert stats.chisquare(observed, N_GOF * probs).pvalue > 1e-6


def test_sampler_examples():
    x = D.sample("normal", (0, 1), N_GOF, D.RngStream(4))
    assert abs(x.mean()) < 4 / math.sqrt(N_GOF)
    assert x.var() == pytest.approx(1.0, rel=0.05)
    u = D.sample("beta", (1, 1), 10_000, D.RngStream(4))
    assert u.min() >= 0 and u.max() <= 1 and u.mean() == pytest.approx(0.5, abs=0.02)
    k = D.sample("poisson", (1,), 10_000, D.RngStream(4))
    assert k.min() >= 0 and k.mean() == pytest.approx(1.0, abs=0.05)
    np.testing.assert_array_equal(
        D.sample("laplace", (0, 1), 10, D.RngStream(9, 9)),
        D.sample("laplace", (0, 1), 10, D.RngStream(9, 9)),
    )


@pytest.mark.parametrize(
    "family,params",
    [("normal", (0, 0)), ("beta", (0, 1)), ("poisson", (-1,)), ("exponential", (0,)),
     ("laplace", (0, -2)), ("gamma", (1, 1)), ("normal", (0,))],
)
def test_invalid_sampler_parameters(family, params):
    with pytest.raises(ValueError):
        D.sample(family, params, 5, D.RngStream(0))
