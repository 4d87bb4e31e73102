"""Probability kernels: reference distributions and simulation samplers.

CDF and quantile functions for the standard normal, Student t with
fractional degrees of freedom and chi-square with one degree of freedom are
implemented on top of the standard library. Samplers draw their base
variates from a numpy ``Generator`` seeded per stream, so replications never
share a sequential generator.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

_EPS = 1e-16
_FPMIN = 1e-300
_MAXIT = 20000

_SQRT2 = math.sqrt(2.0)
_SQRT2PI = math.sqrt(2.0 * math.pi)


# --------------------------------------------------------------------------
# Random streams
# --------------------------------------------------------------------------


@dataclass(frozen=True)
class RngStream:
    """Counter-based random stream keyed by ``(master_seed, stream_id)``.

    The same key always yields the same sequence; different ``stream_id``
    values (or child paths) give independent Philox streams.
    """

    master_seed: int
    stream_id: int = 0
    path: tuple[int, ...] = field(default=())

    def __post_init__(self):
        if self.master_seed < 0 or self.stream_id < 0 or any(k < 0 for k in self.path):
            raise ValueError("stream keys must be non-negative integers")

    def child(self, key: int) -> "RngStream":
        return RngStream(self.master_seed, self.stream_id, self.path + (int(key),))

    def generator(self) -> np.random.Generator:
        seq = np.random.SeedSequence(
            self.master_seed, spawn_key=(self.stream_id, *self.path)
        )
        return np.random.Generator(np.random.Philox(seq))


def _as_generator(stream) -> np.random.Generator:
    if isinstance(stream, np.random.Generator):
        return stream
    if isinstance(stream, RngStream):
        return stream.generator()
    raise TypeError("stream must be an RngStream or numpy Generator")


# --------------------------------------------------------------------------
# Normal
# --------------------------------------------------------------------------


def normal_cdf(x: float) -> float:
    return 0.5 * math.erfc(-x / _SQRT2)


def normal_sf(x: float) -> float:
    return 0.5 * math.erfc(x / _SQRT2)


def normal_pdf(x: float) -> float:
    return math.exp(-0.5 * x * x) / _SQRT2PI


# Acklam's rational approximation, refined below by one Halley step.
_A = (
    -3.969683028665376e01,
    2.209460984245205e02,
    -2.759285104469687e02,
    1.383577518672690e02,
    -3.066479806614716e01,
    2.506628277459239e00,
)
_B = (
    -5.447609879822406e01,
    1.615858368580409e02,
    -1.556989798598866e02,
    6.680131188771972e01,
    -1.328068155288572e01,
)
_C = (
    -7.784894002430293e-03,
    -3.223964580411365e-01,
    -2.400758277161838e00,
    -2.549732539343734e00,
    4.374664141464968e00,
    2.938163982698783e00,
)
_D = (
    7.784695709041462e-03,
    3.224671290700398e-01,
    2.445134137142996e00,
    3.754408661907416e00,
)
_P_LOW = 0.02425


def _acklam(p: float) -> float:
    if p < _P_LOW:
        q = math.sqrt(-2.0 * math.log(p))
        num = ((((_C[0] * q + _C[1]) * q + _C[2]) * q + _C[3]) * q + _C[4]) * q + _C[5]
        den = (((_D[0] * q + _D[1]) * q + _D[2]) * q + _D[3]) * q + 1.0
        return num / den
    if p > 1.0 - _P_LOW:
        return -_acklam(1.0 - p)
    q = p - 0.5
    r = q * q
    num = (((((_A[0] * r + _A[1]) * r + _A[2]) * r + _A[3]) * r + _A[4]) * r + _A[5]) * q
    den = ((((_B[0] * r + _B[1]) * r + _B[2]) * r + _B[3]) * r + _B[4]) * r + 1.0
    return num / den


def normal_quantile(p: float) -> float:
    """Inverse of :func:`normal_cdf` on ``(0, 1)``."""
    if not 0.0 < p < 1.0:
        raise ValueError(f"probability must lie in (0, 1), got {p!r}")
    if p > 0.5:
        # work in the lower tail so 1 - p keeps its relative precision
        return -normal_quantile(1.0 - p)
    x = _acklam(p)
    for _ in range(2):
        err = normal_cdf(x) - p
        u = err * _SQRT2PI * math.exp(0.5 * x * x)
        x = x - u / (1.0 + 0.5 * x * u)
    return x


# --------------------------------------------------------------------------
# Regularized incomplete beta
# --------------------------------------------------------------------------


def _betacf(a: float, b: float, x: float) -> float:
    """Continued fraction for the incomplete beta (modified Lentz)."""
    qab = a + b
    qap = a + 1.0
    qam = a - 1.0
    c = 1.0
    d = 1.0 - qab * x / qap
    if abs(d) < _FPMIN:
        d = _FPMIN
    d = 1.0 / d
    h = d
    for m in range(1, _MAXIT + 1):
        m2 = 2 * m
        aa = m * (b - m) * x / ((qam + m2) * (a + m2))
        d = 1.0 + aa * d
        if abs(d) < _FPMIN:
            d = _FPMIN
        c = 1.0 + aa / c
        if abs(c) < _FPMIN:
            c = _FPMIN
        d = 1.0 / d
        h *= d * c
        aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2))
        d = 1.0 + aa * d
        if abs(d) < _FPMIN:
            d = _FPMIN
        c = 1.0 + aa / c
        if abs(c) < _FPMIN:
            c = _FPMIN
        d = 1.0 / d
        delta = d * c
        h *= delta
        if abs(delta - 1.0) < _EPS:
            return h
    raise ArithmeticError(f"incomplete beta continued fraction did not converge (a={a}, b={b}, x={x})")


def _stirling_corr(x: float) -> float:
    # lgamma(x) - [(x - 1/2) log x - x + log(2 pi)/2], valid for x >= 20
    x2 = x * x
    return (1.0 / 12.0 - (1.0 / 360.0 - (1.0 / 1260.0 - 1.0 / (1680.0 * x2)) / x2) / x2) / x


def _log_beta(a: float, b: float) -> float:
    small, big = (a, b) if a <= b else (b, a)
    if big < 20.0:
        return math.lgamma(a) + math.lgamma(b) - math.lgamma(a + b)
    # lgamma(big) - lgamma(big + small) without cancellation
    s = big + small
    diff = (
        -(big - 0.5) * math.log1p(small / big)
        - small * math.log(s)
        + small
        + _stirling_corr(big)
        - _stirling_corr(s)
    )
    return math.lgamma(small) + diff


def betainc_pair(a: float, b: float, x: float, y: float | None = None) -> tuple[float, float]:
    """Return ``(I_x(a, b), 1 - I_x(a, b))`` with both tails accurate.

    ``y`` may carry ``1 - x`` when it is known more precisely than the
    subtraction would give.
    """
    if a <= 0 or b <= 0:
        raise ValueError("beta parameters must be positive")
    if y is None:
        y = 1.0 - x
    if x <= 0.0:
        return 0.0, 1.0
    if y <= 0.0:
        return 1.0, 0.0
    log_x = math.log(x) if x < 0.5 else math.log1p(-y)
    log_y = math.log(y) if y < 0.5 else math.log1p(-x)
    front = math.exp(a * log_x + b * log_y - _log_beta(a, b))
    if x < (a + 1.0) / (a + b + 2.0):
        lower = front * _betacf(a, b, x) / a
        return lower, 1.0 - lower
    upper = front * _betacf(b, a, y) / b
    return 1.0 - upper, upper


def betainc(a: float, b: float, x: float) -> float:
    """Regularized incomplete beta function ``I_x(a, b)``."""
    return betainc_pair(a, b, x)[0]


def beta_cdf(x: float, a: float, b: float) -> float:
    if x <= 0.0:
        return 0.0
    if x >= 1.0:
        return 1.0
    return betainc(a, b, x)


def _betainc_inv(a: float, b: float, target: float) -> float:
    """Solve ``I_x(a, b) = target`` for x with a safeguarded Newton iteration."""
    if target <= 0.0:
        return 0.0
    if target >= 1.0:
        return 1.0
    lbeta = _log_beta(a, b)
    # starting point (Numerical Recipes, invbetai)
    if a >= 1.0 and b >= 1.0:
        pp = target if target < 0.5 else 1.0 - target
        t = math.sqrt(-2.0 * math.log(pp))
        z = (2.30753 + t * 0.27061) / (1.0 + t * (0.99229 + t * 0.04481)) - t
        if target < 0.5:
            z = -z
        al = (z * z - 3.0) / 6.0
        h = 2.0 / (1.0 / (2.0 * a - 1.0) + 1.0 / (2.0 * b - 1.0))
        w = z * math.sqrt(al + h) / h - (1.0 / (2.0 * b - 1.0) - 1.0 / (2.0 * a - 1.0)) * (
            al + 5.0 / 6.0 - 2.0 / (3.0 * h)
        )
        x = a / (a + b * math.exp(min(2.0 * w, 700.0)))
    else:
        lna = math.log(a / (a + b))
        lnb = math.log(b / (a + b))
        t = math.exp(a * lna) / a
        u = math.exp(b * lnb) / b
        w = t + u
        if target < t / w:
            x = (a * w * target) ** (1.0 / a)
        else:
            x = 1.0 - (b * w * (1.0 - target)) ** (1.0 / b)
    lo, hi = 0.0, 1.0
    if not lo < x < hi:
        x = 0.5
    for _ in range(400):
        f = betainc(a, b, x) - target
        if f == 0.0:
            return x
        if f < 0.0:
            lo = x
        else:
            hi = x
        log_pdf = (a - 1.0) * math.log(x) + (b - 1.0) * math.log1p(-x) - lbeta
        pdf = math.exp(log_pdf) if log_pdf < 700.0 else math.inf
        step = f / pdf if pdf > 0.0 else math.inf
        x_new = x - step
        if not lo < x_new < hi or not math.isfinite(x_new):
            # Newton left the bracket: bisect, geometrically near zero
            if lo == 0.0:
                x_new = hi / 16.0
            elif hi / lo > 4.0:
                x_new = math.sqrt(lo * hi)
            else:
                x_new = 0.5 * (lo + hi)
        if abs(x_new - x) <= 1e-15 * x:
            return x_new
        x = x_new
    return x


# --------------------------------------------------------------------------
# Student t
# --------------------------------------------------------------------------


def _check_df(df: float) -> None:
    if not df > 0.0 or math.isnan(df):
        raise ValueError(f"degrees of freedom must be positive, got {df!r}")


def _t_tail(t: float, df: float) -> float:
    """P(T > |t|)."""
    t2 = t * t
    x = df / (df + t2)
    y = t2 / (df + t2)
    lower, _ = betainc_pair(0.5 * df, 0.5, x, y)
    return 0.5 * lower


def t_cdf(x: float, df: float) -> float:
    _check_df(df)
    if math.isinf(x):
        return 1.0 if x > 0 else 0.0
    if x == 0.0:
        return 0.5
    tail = _t_tail(x, df)
    return 1.0 - tail if x > 0 else tail


def t_sf(x: float, df: float) -> float:
    return t_cdf(-x, df)


def t_quantile(p: float, df: float) -> float:
    """Quantile of the central t distribution; ``df`` may be fractional."""
    _check_df(df)
    if not 0.0 < p < 1.0:
        raise ValueError(f"probability must lie in (0, 1), got {p!r}")
    if p == 0.5:
        return 0.0
    if p > 0.5:
        return -t_quantile(1.0 - p, df)
    two_p = 2.0 * p  # P(|T| > |t|)
    a = 0.5 * df
    if df == 1.0:
        return math.tan(math.pi * (p - 0.5))
    # x = df / (df + t^2); split at x = 1/2 to keep the small side accurate
    if two_p < betainc(a, 0.5, 0.5):
        x = _betainc_inv(a, 0.5, two_p)
        t2 = df * (1.0 - x) / x
    else:
        y = _betainc_inv(0.5, a, 1.0 - two_p)
        t2 = df * y / (1.0 - y)
    return -math.sqrt(t2)


# --------------------------------------------------------------------------
# Chi-square, one degree of freedom
# --------------------------------------------------------------------------


def chi2_1_cdf(x: float) -> float:
    if x < 0.0:
        raise ValueError("chi-square argument must be non-negative")
    return math.erf(math.sqrt(0.5 * x))


def chi2_1_sf(x: float) -> float:
    if x < 0.0:
        raise ValueError("chi-square argument must be non-negative")
    return math.erfc(math.sqrt(0.5 * x))


def chi2_1_quantile(p: float) -> float:
    """``z_{(1+p)/2}^2``, so ``chi2_1_quantile(1 - a)`` is the squared two-sided normal critical value."""
    if not 0.0 < p < 1.0:
        raise ValueError(f"probability must lie in (0, 1), got {p!r}")
    z = -normal_quantile(0.5 * (1.0 - p))
    return z * z


# --------------------------------------------------------------------------
# Samplers
# --------------------------------------------------------------------------

FAMILIES = ("normal", "beta", "poisson", "exponential", "laplace")


def _poisson_inversion(rng: np.random.Generator, lam: float, n: int) -> np.ndarray:
    pmf = [math.exp(-lam)]
    cdf = [pmf[0]]
    k = 0
    while cdf[-1] < 1.0 - 1e-16 and k < 1000:
        k += 1
        pmf.append(pmf[-1] * lam / k)
        cdf.append(cdf[-1] + pmf[-1])
    u = rng.random(n)
    return np.searchsorted(np.asarray(cdf), u, side="right").astype(np.float64)


def draw(family: str, params, n: int, rng: np.random.Generator) -> np.ndarray:
    """Draw ``n`` variates from an open generator (no parameter checks)."""
    if family == "normal":
        mean, var = params
        return mean + math.sqrt(var) * rng.standard_normal(n)
    if family == "beta":
        a, b = params
        ga = rng.standard_gamma(a, n)
        gb = rng.standard_gamma(b, n)
        return ga / (ga + gb)
    if family == "poisson":
        (lam,) = params
        if lam <= 10.0:
            return _poisson_inversion(rng, lam, n)
        return rng.poisson(lam, n).astype(np.float64)
    if family == "exponential":
        (rate,) = params
        return -np.log1p(-rng.random(n)) / rate
    if family == "laplace":
        loc, scale = params
        u = rng.random(n) - 0.5
        return loc - scale * np.sign(u) * np.log1p(-2.0 * np.abs(u))
    raise ValueError(f"unknown distribution family {family!r}")


def check_params(family: str, params) -> tuple[float, ...]:
    params = tuple(float(p) for p in params)
    expected = {"normal": 2, "beta": 2, "poisson": 1, "exponential": 1, "laplace": 2}
    if family not in expected:
        raise ValueError(f"unknown distribution family {family!r}")
    if len(params) != expected[family]:
        raise ValueError(f"{family} takes {expected[family]} parameters, got {len(params)}")
    if not all(math.isfinite(p) for p in params):
        raise ValueError("distribution parameters must be finite")
    if family == "normal" and params[1] <= 0:
        raise ValueError("normal variance must be positive")
    if family == "beta" and min(params) <= 0:
        raise ValueError("beta shape parameters must be positive")
    if family in ("poisson", "exponential") and params[0] <= 0:
        raise ValueError(f"{family} parameter must be positive")
    if family == "laplace" and params[1] <= 0:
        raise ValueError("laplace scale must be positive")
    return params


def sample(family: str, params, n: int, stream) -> np.ndarray:
    """Draw ``n`` independent values from a named family.

    Families and parameters: ``normal (mean, variance)``, ``beta (a, b)``,
    ``poisson (lam)``, ``exponential (rate)``, ``laplace (location, scale)``.
    ``stream`` is an :class:`RngStream` or an open numpy ``Generator``.
    """
    params = check_params(family, params)
    if n < 1:
        raise ValueError("sample size must be at least 1")
    return draw(family, params, int(n), _as_generator(stream))
