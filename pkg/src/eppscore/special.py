"""Self-contained numerical primitives: logistic, normal, chi-square, Student t.

Everything here is implemented in plain Python/numpy so that the statistical
contracts of this package do not depend on an external statistics library.
"""

from __future__ import annotations

import math

import numpy as np

__all__ = [
    "sigmoid",
    "logit",
    "norm_cdf",
    "norm_sf",
    "chi2_sf_1df",
    "t_sf_two_sided",
    "betainc_reg",
]


def sigmoid(x):
    """Logistic function 1/(1+exp(-x)), overflow-safe for any float input.

    Accepts scalars or numpy arrays; returns the matching type.
    """
    if np.isscalar(x):
        # np.exp keeps the scalar and array paths bit-identical.
        if x >= 0:
            return float(1.0 / (1.0 + np.exp(-x)))
        z = float(np.exp(x))
        return z / (1.0 + z)
    x = np.asarray(x, dtype=float)
    out = np.empty_like(x)
    pos = x >= 0
    out[pos] = 1.0 / (1.0 + np.exp(-x[pos]))
    z = np.exp(x[~pos])
    out[~pos] = z / (1.0 + z)
    return out


def logit(p: float) -> float:
    """Inverse of :func:`sigmoid`; requires 0 < p < 1."""
    if not 0.0 < p < 1.0:
        raise ValueError(f"logit requires 0 < p < 1, got {p}")
    return math.log(p / (1.0 - p))


# Hastings-type rational approximation of the standard normal CDF
# (Abramowitz & Stegun 26.2.17); absolute error below 7.5e-8.
_NORM_P = 0.2316419
_NORM_B = (0.319381530, -0.356563782, 1.781477937, -1.821255978, 1.330274429)
_INV_SQRT_2PI = 1.0 / math.sqrt(2.0 * math.pi)


def norm_cdf(x: float) -> float:
    """Standard normal CDF, absolute error < 7.5e-8."""
    if x < 0.0:
        return 1.0 - norm_cdf(-x)
    if x > 40.0:
        return 1.0
    t = 1.0 / (1.0 + _NORM_P * x)
    b1, b2, b3, b4, b5 = _NORM_B
    poly = t * (b1 + t * (b2 + t * (b3 + t * (b4 + t * b5))))
    return 1.0 - _INV_SQRT_2PI * math.exp(-0.5 * x * x) * poly


def norm_sf(x: float) -> float:
    """Standard normal upper tail P(Z > x)."""
    return norm_cdf(-x)


def chi2_sf_1df(x: float) -> float:
    """Upper tail of the chi-square distribution with 1 degree of freedom.

    Uses the exact identity P(X > x) = 2 P(Z > sqrt(x)) for Z standard
    normal, so the accuracy is that of :func:`norm_cdf`.
    """
    if x <= 0.0:
        return 1.0
    return 2.0 * norm_sf(math.sqrt(x))


def _betacf(a: float, b: float, x: float) -> float:
    # Continued fraction for the incomplete beta (modified Lentz).
    tiny = 1e-300
    qab, qap, qam = a + b, a + 1.0, a - 1.0
    c = 1.0
    d = 1.0 - qab * x / qap
    if abs(d) < tiny:
        d = tiny
    d = 1.0 / d
    h = d
    for m in range(1, 300):
        m2 = 2 * m
        aa = m * (b - m) * x / ((qam + m2) * (a + m2))
        d = 1.0 + aa * d
        if abs(d) < tiny:
            d = tiny
        c = 1.0 + aa / c
        if abs(c) < tiny:
            c = tiny
        d = 1.0 / d
        h *= d * c
        aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2))
        d = 1.0 + aa * d
        if abs(d) < tiny:
            d = tiny
        c = 1.0 + aa / c
        if abs(c) < tiny:
            c = tiny
        d = 1.0 / d
        delta = d * c
        h *= delta
        if abs(delta - 1.0) < 1e-15:
            break
    return h


def betainc_reg(a: float, b: float, x: float) -> float:
    """Regularized incomplete beta function I_x(a, b) for a, b > 0."""
    if not 0.0 <= x <= 1.0:
        raise ValueError(f"x must lie in [0, 1], got {x}")
    if x == 0.0:
        return 0.0
    if x == 1.0:
        return 1.0
    ln_front = (
        math.lgamma(a + b)
        - math.lgamma(a)
        - math.lgamma(b)
        + a * math.log(x)
        + b * math.log1p(-x)
    )
    front = math.exp(ln_front)
    if x < (a + 1.0) / (a + b + 2.0):
        return front * _betacf(a, b, x) / a
    return 1.0 - front * _betacf(b, a, 1.0 - x) / b


def t_sf_two_sided(t: float, df: int) -> float:
    """Two-sided tail P(|T| >= t) for Student's t with `df` degrees of freedom."""
    if df < 1:
        raise ValueError(f"degrees of freedom must be >= 1, got {df}")
    if math.isinf(t):
        return 0.0
    return betainc_reg(df / 2.0, 0.5, df / (df + t * t))
