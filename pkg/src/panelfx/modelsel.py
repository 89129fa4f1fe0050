"""Breusch-Pagan LM and Hausman tests, and the pooled/RE/FE decision rule."""

from __future__ import annotations

import enum
from dataclasses import dataclass

import numpy as np

from .errors import AllSingletonEntities, MismatchedFits, TooFewObservations
from .estimators import (
    FixedEffectsFit,
    RandomEffectsFit,
    fixed_effects_within,
    pooled_ols,
    random_effects_gls,
)
from .numstats import chi_square_sf
from .panel import PanelDataset

__all__ = [
    "Model",
    "SpecTestResult",
    "Selection",
    "breusch_pagan",
    "breusch_pagan_lm",
    "hausman",
    "decide",
    "select_model",
    "DEFAULT_ALPHA",
]

DEFAULT_ALPHA = 0.05


class Model(str, enum.Enum):
    POOLED = "pooled"
    RANDOM_EFFECTS = "random_effects"
    FIXED_EFFECTS = "fixed_effects"


@dataclass(frozen=True)
class SpecTestResult:
    test_name: str
    statistic: float
    dof: int
    p_value: float
    alpha: float = DEFAULT_ALPHA
    note: str | None = None

    @property
    def reject_null(self) -> bool:
        return self.p_value < self.alpha


@dataclass(frozen=True)
class Selection:
    chosen: Model
    breusch_pagan: SpecTestResult
    hausman: SpecTestResult | None = None


def breusch_pagan_lm(residuals, codes) -> float:
    """LM statistic for entity effects from pooled residuals grouped by ``codes``.

    Handles unbalanced panels; entities observed once enter the residual
    sums but not the ``sum T_i (T_i - 1)`` normaliser.
    """
    e = np.asarray(residuals, dtype=float)
    codes = np.asarray(codes)
    counts = np.bincount(codes)
    counts = counts[counts > 0].astype(float)
    pair_count = float(np.sum(counts * (counts - 1.0)))
    if pair_count == 0.0:
        raise AllSingletonEntities("every entity is observed once; the LM test is undefined")
    sums = np.bincount(codes, weights=e)
    ratio = float(sums @ sums) / float(e @ e) - 1.0
    total = float(np.sum(counts))
    return total * total / (2.0 * pair_count) * ratio * ratio


def breusch_pagan(
    panel: PanelDataset, response: str, regressor: str, alpha: float = DEFAULT_ALPHA
) -> SpecTestResult:
    """LM test of H0: no entity effects (pooled OLS adequate)."""
    fr = panel.fit_frame(response, regressor)
    if fr.n_obs < 3:
        raise TooFewObservations("Breusch-Pagan needs >= 3 rows")
    fit = pooled_ols(fr, response, regressor)
    lm = breusch_pagan_lm(fit.residuals, fr.codes)
    return SpecTestResult("breusch_pagan", lm, 1, chi_square_sf(lm, 1), alpha)


def hausman(fe: FixedEffectsFit, re: RandomEffectsFit, alpha: float = DEFAULT_ALPHA) -> SpecTestResult:
    """Contrast test of H0: random effects consistent.

    A non-positive variance difference is reported with a note, statistic 0
    and p = 1, so the test never rejects on it.
    """
    if (fe.response, fe.regressor, fe.n_obs) != (re.response, re.regressor, re.n_obs):
        raise MismatchedFits(
            f"FE fit ({fe.response}~{fe.regressor}, N={fe.n_obs}) and RE fit "
            f"({re.response}~{re.regressor}, N={re.n_obs}) differ"
        )
    var_diff = fe.se**2 - re.se_delta**2
    diff = fe.delta - re.delta
    if var_diff <= 0.0:
        if diff == 0.0:
            return SpecTestResult("hausman", 0.0, 1, 1.0, alpha)
        return SpecTestResult(
            "hausman", 0.0, 1, 1.0, alpha,
            note=f"non-positive variance difference {var_diff:.6g}; statistic not defined",
        )
    stat = diff * diff / var_diff
    return SpecTestResult("hausman", stat, 1, chi_square_sf(stat, 1), alpha)


def decide(bp: SpecTestResult, hm: SpecTestResult | None) -> Model:
    if not bp.reject_null:
        return Model.POOLED
    if hm is None:
        raise ValueError("Breusch-Pagan rejected; a Hausman result is required")
    return Model.FIXED_EFFECTS if hm.reject_null else Model.RANDOM_EFFECTS


def select_model(
    panel: PanelDataset, response: str, regressor: str, alpha: float = DEFAULT_ALPHA
) -> Selection:
    """Breusch-Pagan first; only after a rejection run Hausman to pick FE or RE."""
    bp = breusch_pagan(panel, response, regressor, alpha)
    if not bp.reject_null:
        return Selection(Model.POOLED, bp)
    fe = fixed_effects_within(panel, response, regressor)
    re = random_effects_gls(panel, response, regressor)
    hm = hausman(fe, re, alpha)
    return Selection(decide(bp, hm), bp, hm)
