"""Single-regressor panel estimators.

``Y_it = delta * D_it + u_i + e_it``. The within estimator removes ``u_i``
by subtracting entity means; LSDV does the same with one dummy column per
entity and serves as a brute-force check; the random-effects estimator
quasi-demeans with weights derived from two-step variance components.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import NamedTuple

import numpy as np

from .errors import (
    DegenerateBetweenRegression,
    DegenerateRegressor,
    RankDeficient,
    TooFewEntities,
    TooFewObservations,
    TooManyEntities,
)
from .numstats import RegressionFit, adjusted_r_squared, ols, t_critical, two_sided_p
from .panel import FitFrame, PanelDataset, demean

__all__ = [
    "EntitySlope",
    "FixedEffectsFit",
    "RandomEffectsFit",
    "pooled_ols",
    "fixed_effects_within",
    "entity_slopes",
    "lsdv",
    "random_effects_gls",
    "LSDV_MAX_ENTITIES",
    "DEGENERACY_RTOL",
]

LSDV_MAX_ENTITIES = 512
DEGENERACY_RTOL = 1e-12


class EntitySlope(NamedTuple):
    entity: str
    slope: float
    degenerate: bool


@dataclass(frozen=True)
class FixedEffectsFit:
    response: str
    regressor: str
    delta: float
    se: float
    t_stat: float
    p_value: float
    ci_low: float
    ci_high: float
    n_obs: int
    n_entities: int
    dof: int
    sigma2: float
    r_squared_within: float
    adj_r_squared: float
    entity_effects: dict[str, float]
    entity_slopes: tuple[EntitySlope, ...]
    residuals: np.ndarray = field(repr=False)


@dataclass(frozen=True)
class RandomEffectsFit:
    response: str
    regressor: str
    delta: float
    intercept: float
    se_delta: float
    se_intercept: float
    t_stat: float
    p_value: float
    ci_low: float
    ci_high: float
    n_obs: int
    n_entities: int
    dof: int
    sigma2_e: float
    sigma2_u: float
    clamped: bool
    theta: dict[str, float]


def _frame(panel_or_frame, response, regressor) -> FitFrame:
    if isinstance(panel_or_frame, FitFrame):
        return panel_or_frame
    return panel_or_frame.fit_frame(response, regressor)


def _is_degenerate(sum_sq: float, count: int, max_abs: float) -> bool:
    return sum_sq <= DEGENERACY_RTOL * count * max_abs * max_abs


def pooled_ols(panel: PanelDataset, response: str, regressor: str) -> RegressionFit:
    """Intercept-plus-slope OLS over every usable row, ignoring entities."""
    fr = _frame(panel, response, regressor)
    if fr.n_obs < 3:
        raise TooFewObservations(f"pooled OLS needs >= 3 rows, got {fr.n_obs}")
    return ols(fr.x, fr.y, intercept=True, names=[regressor])


def entity_slopes(panel: PanelDataset, response: str, regressor: str) -> tuple[EntitySlope, ...]:
    """Per-entity slope of demeaned response on demeaned regressor.

    Every panel entity gets an entry in panel order. Entities whose regressor
    does not vary (including single-row and no-row entities) get slope 0 and
    ``degenerate=True``.
    """
    fr = panel.fit_frame(response, regressor)
    by_entity: dict[str, tuple[np.ndarray, np.ndarray]] = {}
    for i, ent in enumerate(fr.entities):
        mask = fr.codes == i
        by_entity[ent] = (fr.x[mask], fr.y[mask])
    out = []
    for ent in panel.entities:
        if ent not in by_entity:
            out.append(EntitySlope(ent, 0.0, True))
            continue
        out.append(EntitySlope(ent, *_one_slope(*by_entity[ent])))
    return tuple(out)


def _one_slope(x: np.ndarray, y: np.ndarray) -> tuple[float, bool]:
    n = len(x)
    xm = math.fsum(x) / n
    ym = math.fsum(y) / n
    dx = [xi - xm for xi in x]
    dy = [yi - ym for yi in y]
    sxx = math.fsum(a * a for a in dx)
    if _is_degenerate(sxx, n, float(np.max(np.abs(x)))):
        return 0.0, True
    return math.fsum(a * b for a, b in zip(dx, dy)) / sxx, False


def fixed_effects_within(
    panel: PanelDataset, response: str, regressor: str, level: float = 0.95
) -> FixedEffectsFit:
    """Within-group fixed-effects slope with recovered entity effects.

    Notes
    -----
    The demeaned regression has no intercept and ``dof = N - n - 1``. The
    reported R^2 is the within R^2 and the adjusted value uses the same dof.
    Entity effects are ``mean(Y_i) - delta * mean(D_i)``.
    """
    fr = panel.fit_frame(response, regressor)
    n, N = fr.n_entities, fr.n_obs
    if n < 2:
        raise TooFewEntities(f"fixed effects needs >= 2 entities, got {n}")
    dof = N - n - 1
    if dof < 1:
        raise TooFewObservations(f"N - n - 1 = {dof}; need at least 1")
    xd, xbar = demean(fr.codes, fr.x, n)
    yd, ybar = demean(fr.codes, fr.y, n)
    sxx = float(xd @ xd)
    if _is_degenerate(sxx, N, float(np.max(np.abs(fr.x)))):
        raise DegenerateRegressor(f"{regressor} has no within-entity variation")
    delta = float(xd @ yd) / sxx
    resid = yd - delta * xd
    rss = float(resid @ resid)
    tss = float(yd @ yd)
    sigma2 = rss / dof
    se = math.sqrt(sigma2 / sxx)
    t = delta / se if se > 0 else math.copysign(math.inf, delta)
    crit = t_critical(level, dof)
    r2 = 1.0 - rss / tss if tss > 0 else 1.0
    effects = ybar - delta * xbar
    return FixedEffectsFit(
        response=response,
        regressor=regressor,
        delta=delta,
        se=se,
        t_stat=t,
        p_value=two_sided_p(t, dof),
        ci_low=delta - crit * se,
        ci_high=delta + crit * se,
        n_obs=N,
        n_entities=n,
        dof=dof,
        sigma2=sigma2,
        r_squared_within=r2,
        adj_r_squared=adjusted_r_squared(r2, N, dof),
        entity_effects=dict(zip(fr.entities, effects.tolist())),
        entity_slopes=entity_slopes(panel, response, regressor),
        residuals=resid,
    )


def lsdv(panel: PanelDataset, response: str, regressor: str) -> RegressionFit:
    """OLS of the response on the regressor plus one dummy per entity (no global intercept).

    Coefficient names are the regressor followed by the entity labels.
    """
    fr = panel.fit_frame(response, regressor)
    n = fr.n_entities
    if n > LSDV_MAX_ENTITIES:
        raise TooManyEntities(f"{n} entities exceeds the LSDV guard of {LSDV_MAX_ENTITIES}")
    if fr.n_obs - n - 1 < 1:
        raise TooFewObservations("LSDV needs N - n - 1 >= 1")
    dummies = np.zeros((fr.n_obs, n))
    dummies[np.arange(fr.n_obs), fr.codes] = 1.0
    X = np.column_stack([fr.x, dummies])
    return ols(X, fr.y, intercept=False, names=[regressor, *fr.entities])


def random_effects_gls(
    panel: PanelDataset, response: str, regressor: str, level: float = 0.95
) -> RandomEffectsFit:
    """Feasible GLS random-effects slope.

    Variance components come from two auxiliary fits. The idiosyncratic
    variance is the within residual variance; the entity-effect variance is
    ``max(0, s2_between - s2_e / T_h)`` where ``s2_between`` is the residual
    variance of the entity-means regression and ``T_h`` the harmonic mean of
    the group sizes. Each entity is then quasi-demeaned by
    ``theta_i = 1 - sqrt(s2_e / (T_i s2_u + s2_e))`` and OLS is run on the
    transformed data, with the constant column becoming ``1 - theta_i``.
    """
    fr = panel.fit_frame(response, regressor)
    n, N = fr.n_entities, fr.n_obs
    if n < 3:
        raise TooFewEntities(f"random effects needs >= 3 entities for the between fit, got {n}")
    dof_w = N - n - 1
    if dof_w < 1:
        raise TooFewObservations("random effects needs N - n - 1 >= 1")
    xd, xbar = demean(fr.codes, fr.x, n)
    yd, ybar = demean(fr.codes, fr.y, n)
    sxx = float(xd @ xd)
    if _is_degenerate(sxx, N, float(np.max(np.abs(fr.x)))):
        raise DegenerateRegressor(f"{regressor} has no within-entity variation")
    b_w = float(xd @ yd) / sxx
    r_w = yd - b_w * xd
    sigma2_e = float(r_w @ r_w) / dof_w
    try:
        between = ols(xbar, ybar, intercept=True, names=[regressor])
    except RankDeficient as exc:
        raise DegenerateBetweenRegression(str(exc)) from None
    counts = fr.counts.astype(float)
    t_harm = n / float(np.sum(1.0 / counts))
    raw_u = between.sigma2 - sigma2_e / t_harm
    clamped = raw_u < 0.0
    sigma2_u = 0.0 if clamped else raw_u
    if sigma2_e > 0.0:
        theta = 1.0 - np.sqrt(sigma2_e / (counts * sigma2_u + sigma2_e))
    else:
        theta = np.zeros(n)
    th_row = theta[fr.codes]
    X = np.column_stack([1.0 - th_row, fr.x - th_row * xbar[fr.codes]])
    y = fr.y - th_row * ybar[fr.codes]
    fit = ols(X, y, intercept=False, names=["const", regressor], level=level)
    # quasi-demeaned errors have variance sigma2_e, so the GLS covariance uses it directly
    se = np.sqrt(sigma2_e * fit.unscaled_variances)
    delta = float(fit.coefficients[1])
    t = delta / se[1] if se[1] > 0 else math.copysign(math.inf, delta)
    crit = t_critical(level, fit.dof)
    return RandomEffectsFit(
        response=response,
        regressor=regressor,
        delta=delta,
        intercept=float(fit.coefficients[0]),
        se_delta=float(se[1]),
        se_intercept=float(se[0]),
        t_stat=t,
        p_value=two_sided_p(t, fit.dof),
        ci_low=delta - crit * float(se[1]),
        ci_high=delta + crit * float(se[1]),
        n_obs=N,
        n_entities=n,
        dof=fit.dof,
        sigma2_e=sigma2_e,
        sigma2_u=sigma2_u,
        clamped=bool(clamped),
        theta=dict(zip(fr.entities, theta.tolist())),
    )
