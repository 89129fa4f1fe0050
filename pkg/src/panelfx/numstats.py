"""Least squares and the tail probabilities used for p-values and intervals."""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np
import scipy.linalg

from .errors import InvalidDf, InvalidLevel, RankDeficient, TooFewObservations

__all__ = [
    "RegressionFit",
    "ols",
    "adjusted_r_squared",
    "chi_square_sf",
    "student_t_sf",
    "two_sided_p",
    "t_critical",
    "regularized_gamma_q",
    "regularized_beta",
]

_EPS = np.finfo(float).eps
_MAX_ITER = 20000
_CF_TINY = 1e-300


@dataclass(frozen=True)
class RegressionFit:
    names: tuple[str, ...]
    coefficients: np.ndarray
    standard_errors: np.ndarray
    t_stats: np.ndarray
    p_values: np.ndarray
    ci_low: np.ndarray
    ci_high: np.ndarray
    residuals: np.ndarray
    n_obs: int
    dof: int
    r_squared: float
    adj_r_squared: float
    sigma2: float
    unscaled_variances: np.ndarray  # diagonal of (X'X)^-1

    def coef(self, name: str) -> float:
        return float(self.coefficients[self.names.index(name)])


def adjusted_r_squared(r_squared: float, n_obs: int, dof: int) -> float:
    """``1 - (1 - R^2) (N - 1) / dof``; ``dof`` is estimator specific."""
    return 1.0 - (1.0 - r_squared) * (n_obs - 1) / dof


def ols(design, response, intercept: bool = True, names=None, level: float = 0.95) -> RegressionFit:
    """Least squares through a column-pivoted QR factorisation.

    Parameters
    ----------
    design : array_like, shape (N, k)
    response : array_like, shape (N,)
    intercept : bool
        Prepend a column of ones (named ``"const"``).
    names : sequence of str, optional
        Column labels for ``design``; default ``x0, x1, ...``.

    Returns
    -------
    RegressionFit
        Standard errors use ``sigma2 = RSS / (N - k_total)``; p-values are
        two-sided Student-t with the same degrees of freedom.
    """
    X = np.asarray(design, dtype=float)
    if X.ndim == 1:
        X = X[:, None]
    y = np.asarray(response, dtype=float)
    n, k = X.shape
    if names is None:
        names = [f"x{j}" for j in range(k)]
    names = list(names)
    if intercept:
        X = np.column_stack([np.ones(n), X])
        names = ["const"] + names
    k_total = X.shape[1]
    if n <= k_total:
        raise TooFewObservations(f"need more than {k_total} observations, got {n}")

    Q, R, piv = scipy.linalg.qr(X, mode="economic", pivoting=True)
    diag = np.abs(np.diag(R))
    tol = n * _EPS * diag[0] if diag.size else 0.0
    if diag[0] == 0.0 or np.any(diag <= tol):
        raise RankDeficient(f"design has rank below {k_total} (tolerance {tol:.3g})")

    beta_p = scipy.linalg.solve_triangular(R, Q.T @ y)
    beta = np.empty(k_total)
    beta[piv] = beta_p
    resid = y - X @ beta
    rss = float(resid @ resid)
    dof = n - k_total
    sigma2 = rss / dof

    R_inv = scipy.linalg.solve_triangular(R, np.eye(k_total))
    var_p = np.sum(R_inv**2, axis=1)
    var = np.empty(k_total)
    var[piv] = var_p
    se = np.sqrt(sigma2 * var)

    with np.errstate(divide="ignore", invalid="ignore"):
        t = np.where(se > 0, beta / se, np.copysign(np.inf, beta))
    p = np.array([two_sided_p(float(ti), dof) for ti in t])
    crit = t_critical(level, dof)

    centered = y - y.mean() if intercept else y
    tss = float(centered @ centered)
    r2 = 1.0 - rss / tss if tss > 0 else 1.0
    return RegressionFit(
        names=tuple(names),
        coefficients=beta,
        standard_errors=se,
        t_stats=t,
        p_values=p,
        ci_low=beta - crit * se,
        ci_high=beta + crit * se,
        residuals=resid,
        n_obs=n,
        dof=dof,
        r_squared=r2,
        adj_r_squared=adjusted_r_squared(r2, n, dof),
        sigma2=sigma2,
        unscaled_variances=var,
    )


# -- special functions ---------------------------------------------------------


def _check_df(df) -> float:
    try:
        ok = float(df) > 0 and float(df).is_integer()
    except (TypeError, ValueError):
        ok = False
    if not ok or isinstance(df, bool):
        raise InvalidDf(df)
    return float(df)


def _gamma_series(a: float, x: float) -> float:
    # lower regularized P(a, x); converges quickly for x < a + 1
    term = 1.0 / a
    total = term
    ap = a
    for _ in range(_MAX_ITER):
        ap += 1.0
        term *= x / ap
        total += term
        if abs(term) < abs(total) * 1e-17:
            break
    return total * math.exp(-x + a * math.log(x) - math.lgamma(a))


def _gamma_cf(a: float, x: float) -> float:
    # upper regularized Q(a, x) by modified Lentz; converges for x >= a + 1
    b = x + 1.0 - a
    c = 1.0 / _CF_TINY
    d = 1.0 / b
    h = d
    for i in range(1, _MAX_ITER):
        an = -i * (i - a)
        b += 2.0
        d = an * d + b
        if abs(d) < _CF_TINY:
            d = _CF_TINY
        c = b + an / c
        if abs(c) < _CF_TINY:
            c = _CF_TINY
        d = 1.0 / d
        delta = d * c
        h *= delta
        if abs(delta - 1.0) < 1e-16:
            break
    return math.exp(-x + a * math.log(x) - math.lgamma(a)) * h


def regularized_gamma_q(a: float, x: float) -> float:
    """Upper regularized incomplete gamma function Q(a, x)."""
    if x <= 0.0:
        return 1.0
    if math.isinf(x):
        return 0.0
    if x < a + 1.0:
        return min(1.0, max(0.0, 1.0 - _gamma_series(a, x)))
    return min(1.0, max(0.0, _gamma_cf(a, x)))


def _beta_cf(a: float, b: float, x: float) -> float:
    qab, qap, qam = a + b, a + 1.0, a - 1.0
    c = 1.0
    d = 1.0 - qab * x / qap
    if abs(d) < _CF_TINY:
        d = _CF_TINY
    d = 1.0 / d
    h = d
    for m in range(1, _MAX_ITER):
        m2 = 2 * m
        aa = m * (b - m) * x / ((qam + m2) * (a + m2))
        d = 1.0 + aa * d
        if abs(d) < _CF_TINY:
            d = _CF_TINY
        c = 1.0 + aa / c
        if abs(c) < _CF_TINY:
            c = _CF_TINY
        d = 1.0 / d
        h *= d * c
        aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2))
        d = 1.0 + aa * d
        if abs(d) < _CF_TINY:
            d = _CF_TINY
        c = 1.0 + aa / c
        if abs(c) < _CF_TINY:
            c = _CF_TINY
        d = 1.0 / d
        delta = d * c
        h *= delta
        if abs(delta - 1.0) < 1e-16:
            break
    return h


def regularized_beta(a: float, b: float, x: float) -> float:
    """Regularized incomplete beta function I_x(a, b)."""
    if x <= 0.0:
        return 0.0
    if x >= 1.0:
        return 1.0
    log_front = (
        math.lgamma(a + b) - math.lgamma(a) - math.lgamma(b) + a * math.log(x) + b * math.log1p(-x)
    )
    front = math.exp(log_front)
    if x < (a + 1.0) / (a + b + 2.0):
        return front * _beta_cf(a, b, x) / a
    return 1.0 - front * _beta_cf(b, a, 1.0 - x) / b


def chi_square_sf(x: float, df) -> float:
    """Upper tail ``P(X > x)`` of a chi-square variable with ``df`` degrees of freedom."""
    k = _check_df(df)
    if not x >= 0.0:
        raise ValueError(f"chi-square statistic must be >= 0, got {x!r}")
    return regularized_gamma_q(0.5 * k, 0.5 * x)


def student_t_sf(x: float, df) -> float:
    """Upper tail of Student's t; exactly 0.5 at zero and symmetric by construction."""
    v = _check_df(df)
    if x == 0.0:
        return 0.5
    if math.isinf(x):
        return 0.0 if x > 0 else 1.0
    tail = 0.5 * regularized_beta(0.5 * v, 0.5, v / (v + x * x))
    return tail if x > 0 else 1.0 - tail


def two_sided_p(t: float, df) -> float:
    return min(1.0, 2.0 * student_t_sf(abs(t), df))


@lru_cache(maxsize=256)
def t_critical(level: float, df) -> float:
    """Quantile ``c`` with ``student_t_sf(c, df) == (1 - level) / 2``, by bisection."""
    if not 0.0 < level < 1.0:
        raise InvalidLevel(level)
    _check_df(df)
    target = 0.5 * (1.0 - level)
    lo, hi = 0.0, 1.0
    while student_t_sf(hi, df) > target:
        lo, hi = hi, 2.0 * hi
    while hi - lo > 1e-11:
        mid = 0.5 * (lo + hi)
        if student_t_sf(mid, df) > target:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)
