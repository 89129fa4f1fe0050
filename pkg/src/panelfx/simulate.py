"""Synthetic panels from ``Y_it = delta * D_it + u_i + e_it`` and a Monte Carlo harness.

Random stream
-------------
All randomness comes from a splitmix64 counter stream. For state ``s`` the
k-th output (k = 0, 1, ...) is ``mix(s + (k + 1) * 0x9E3779B97F4A7C15 mod 2**64)``
with the splitmix64 finaliser::

    z ^= z >> 30; z *= 0xBF58476D1CE4E5B9
    z ^= z >> 27; z *= 0x94D049BB133111EB
    z ^= z >> 31

A uniform on [0, 1) is ``(out >> 11) * 2**-53``. A standard normal takes two
consecutive uniforms ``(a, b)`` and returns ``sqrt(-2 ln(1 - a)) cos(2 pi b)``.

For one panel with ``n`` entities and ``T`` periods the stream is consumed in
this order, entity-major and period-minor throughout:

1. ``n*T`` uniforms for ``D_it`` (scaled to ``[low, high)``),
2. ``n`` normals ``z_i`` for the entity effects,
3. ``n*T`` normals for ``e_it``.

``u_i = sigma_u * (rho * s_i + sqrt(1 - rho**2) * z_i)`` where ``s_i`` is
``mean_t D_it`` standardised across entities (population sd; 0 if the sd is 0).
Replication ``r`` of a Monte Carlo study uses state ``mix(seed ^ r)``.
"""

from __future__ import annotations

import configparser
import dataclasses
import enum
import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .errors import InvalidConfig
from .estimators import fixed_effects_within, pooled_ols, random_effects_gls
from .modelsel import DEFAULT_ALPHA, breusch_pagan, hausman
from .panel import CategoryMap, PanelDataset, build_panel

__all__ = [
    "SimConfig",
    "Study",
    "MonteCarloSummary",
    "mix64",
    "uniforms",
    "normals",
    "derive_seed",
    "generate_panel",
    "monte_carlo",
    "load_sim_config",
    "generate_corpus",
]

_GAMMA = np.uint64(0x9E3779B97F4A7C15)
_M1 = np.uint64(0xBF58476D1CE4E5B9)
_M2 = np.uint64(0x94D049BB133111EB)
_MASK = (1 << 64) - 1


def mix64(z):
    """splitmix64 finaliser on a uint64 array (wrapping arithmetic)."""
    z = np.asarray(z, dtype=np.uint64).copy()
    z ^= z >> np.uint64(30)
    z *= _M1
    z ^= z >> np.uint64(27)
    z *= _M2
    z ^= z >> np.uint64(31)
    return z


def derive_seed(seed: int, index: int) -> int:
    return int(mix64(np.array([(seed ^ index) & _MASK], dtype=np.uint64))[0])


def _raw(state: int, start: int, count: int) -> np.ndarray:
    k = np.arange(start + 1, start + count + 1, dtype=np.uint64)
    with np.errstate(over="ignore"):
        return mix64(np.uint64(state) + k * _GAMMA)


def uniforms(state: int, start: int, count: int) -> np.ndarray:
    """Uniforms on [0, 1) from stream positions ``start .. start + count - 1``."""
    return (_raw(state, start, count) >> np.uint64(11)).astype(np.float64) * 2.0**-53


def normals(state: int, start: int, count: int) -> np.ndarray:
    """Standard normals consuming ``2 * count`` stream positions from ``start``."""
    u = uniforms(state, start, 2 * count)
    a, b = u[0::2], u[1::2]
    return np.sqrt(-2.0 * np.log1p(-a)) * np.cos(2.0 * np.pi * b)


@dataclass(frozen=True)
class SimConfig:
    n_entities: int = 30
    periods: int = 4
    delta: float = 0.79
    sigma_u: float = 5.0
    sigma_e: float = 2.0
    rho: float = 0.0
    regressor_low: float = 0.0
    regressor_high: float = 100.0
    seed: int = 42

    def __post_init__(self):
        if self.n_entities < 1 or self.periods < 1:
            raise InvalidConfig("n_entities and periods must be positive")
        if not self.regressor_low < self.regressor_high:
            raise InvalidConfig("regressor_low must be below regressor_high")
        if self.sigma_u < 0 or self.sigma_e < 0:
            raise InvalidConfig("standard deviations must be non-negative")
        if not -1.0 <= self.rho <= 1.0:
            raise InvalidConfig("rho must lie in [-1, 1]")
        if not 0 <= self.seed <= _MASK:
            raise InvalidConfig("seed must be an unsigned 64-bit integer")


def simulate_arrays(config: SimConfig):
    """Return ``(x, y, u)`` arrays of shape (n, T), (n, T), (n,)."""
    n, T = config.n_entities, config.periods
    nt = n * T
    x = config.regressor_low + (config.regressor_high - config.regressor_low) * uniforms(
        config.seed, 0, nt
    )
    x = x.reshape(n, T)
    z = normals(config.seed, nt, n)
    eps = normals(config.seed, nt + 2 * n, nt).reshape(n, T)
    xbar = x.mean(axis=1)
    sd = xbar.std()
    s = (xbar - xbar.mean()) / sd if sd > 0 else np.zeros(n)
    rho = config.rho
    u = config.sigma_u * (rho * s + math.sqrt(1.0 - rho * rho) * z)
    y = config.delta * x + u[:, None] + config.sigma_e * eps
    return x, y, u


def generate_panel(config: SimConfig) -> PanelDataset:
    """Balanced panel with variables ``D`` (regressor) and ``Y`` (response).

    Entities are labelled ``e000, e001, ...`` and periods run ``1 .. T``.
    """
    x, y, _ = simulate_arrays(config)
    width = max(3, len(str(config.n_entities - 1)))
    records = [
        (f"e{i:0{width}d}", t + 1, {"D": float(x[i, t]), "Y": float(y[i, t])})
        for i in range(config.n_entities)
        for t in range(config.periods)
    ]
    return build_panel(records)


class Study(str, enum.Enum):
    FE_SLOPE = "fe_slope"
    RE_SLOPE = "re_slope"
    POOLED_SLOPE = "pooled_slope"
    BP_TEST = "bp_test"
    HAUSMAN_TEST = "hausman_test"


@dataclass(frozen=True)
class MonteCarloSummary:
    """Aggregate over replications.

    For slope studies the estimate is the slope and ``rejection_rate`` is
    ``None``. For test studies the estimate tracked is the slope the test is
    built on (pooled for BP, fixed effects for Hausman), and
    ``rejection_rate`` is the share of replications rejecting at ``alpha``.
    """

    study: str
    reps: int
    true_delta: float
    mean_estimate: float
    bias: float
    rmse: float
    sd: float
    mc_se: float
    ci_coverage: float
    rejection_rate: float | None
    mean_statistic: float | None


def _one_rep(panel: PanelDataset, study: Study, alpha: float):
    if study is Study.FE_SLOPE:
        fe = fixed_effects_within(panel, "Y", "D")
        return fe.delta, fe.ci_low, fe.ci_high, None
    if study is Study.RE_SLOPE:
        re = random_effects_gls(panel, "Y", "D")
        return re.delta, re.ci_low, re.ci_high, None
    if study is Study.POOLED_SLOPE:
        fit = pooled_ols(panel, "Y", "D")
        return fit.coefficients[1], fit.ci_low[1], fit.ci_high[1], None
    if study is Study.BP_TEST:
        fit = pooled_ols(panel, "Y", "D")
        res = breusch_pagan(panel, "Y", "D", alpha)
        return fit.coefficients[1], fit.ci_low[1], fit.ci_high[1], res
    fe = fixed_effects_within(panel, "Y", "D")
    re = random_effects_gls(panel, "Y", "D")
    return fe.delta, fe.ci_low, fe.ci_high, hausman(fe, re, alpha)


def monte_carlo(
    config: SimConfig, reps: int, study, alpha: float = DEFAULT_ALPHA
) -> MonteCarloSummary:
    """Run ``study`` on ``reps`` independently seeded panels drawn from ``config``."""
    if reps < 1:
        raise InvalidConfig("reps must be >= 1")
    study = Study(study)
    est = np.empty(reps)
    covered = np.zeros(reps, dtype=bool)
    rejected = np.zeros(reps, dtype=bool)
    stats = np.zeros(reps)
    for r in range(reps):
        cfg = dataclasses.replace(config, seed=derive_seed(config.seed, r))
        e, lo, hi, test = _one_rep(generate_panel(cfg), study, alpha)
        est[r] = e
        covered[r] = lo <= config.delta <= hi
        if test is not None:
            rejected[r] = test.reject_null
            stats[r] = test.statistic
    err = est - config.delta
    sd = float(est.std(ddof=1)) if reps > 1 else 0.0
    is_test = study in (Study.BP_TEST, Study.HAUSMAN_TEST)
    return MonteCarloSummary(
        study=study.value,
        reps=reps,
        true_delta=config.delta,
        mean_estimate=float(est.mean()),
        bias=float(err.mean()),
        rmse=float(math.sqrt(np.mean(err * err))),
        sd=sd,
        mc_se=sd / math.sqrt(reps),
        ci_coverage=float(covered.mean()),
        rejection_rate=float(rejected.mean()) if is_test else None,
        mean_statistic=float(stats.mean()) if is_test else None,
    )


_INT_FIELDS = {"n_entities", "periods", "seed"}


def load_sim_config(path) -> SimConfig:
    """Read ``key = value`` lines (``#`` comments allowed) into a :class:`SimConfig`."""
    parser = configparser.ConfigParser(inline_comment_prefixes=("#",))
    parser.read_string("[sim]\n" + Path(path).read_text(encoding="utf-8"))
    known = {f.name for f in dataclasses.fields(SimConfig)}
    kwargs = {}
    for key, raw in parser["sim"].items():
        if key not in known:
            raise InvalidConfig(f"unknown config field {key!r}")
        try:
            kwargs[key] = int(raw, 0) if key in _INT_FIELDS else float(raw)
        except ValueError:
            raise InvalidConfig(f"cannot parse {key} = {raw!r}") from None
    return SimConfig(**kwargs)


CORPUS_TICKERS = ("CSJWAR", "ETR", "FBGR", "G", "HSPPR", "PCBPR")


def generate_corpus(seed: int = 42, n_sites: int = 30, first_year: int = 2017, periods: int = 4):
    """Synthetic website-traffic records in the ingestion schema.

    Mobile bounce follows the DGP with slope 0.79 on mobile share; desktop
    share is the complement of mobile share and desktop bounce has slope
    0.18 around a level of 30 with independent effects (sd 4). Values are rounded to 4 decimals and one
    desktop bounce cell is left blank.

    Returns
    -------
    list of dict
        One dict per CSV row with keys ``domain, ticker, year, mobile_share,
        mobile_bounce, desktop_share, desktop_bounce``.
    """
    mob = SimConfig(n_sites, periods, 0.79, 5.0, 2.0, 0.5, 40.0, 90.0, derive_seed(seed, 1))
    x_m, y_m, _ = simulate_arrays(mob)
    desk_state = derive_seed(seed, 2)
    u_d = 4.0 * normals(desk_state, 0, n_sites)
    e_d = normals(desk_state, 2 * n_sites, n_sites * periods).reshape(n_sites, periods)
    x_d = 100.0 - x_m
    y_d = 30.0 + 0.18 * x_d + u_d[:, None] + 2.0 * e_d
    rows = []
    for i in range(n_sites):
        domain = f"shop{i:02d}.com"
        for t in range(periods):
            rows.append(
                {
                    "domain": domain,
                    "ticker": CORPUS_TICKERS[i % len(CORPUS_TICKERS)],
                    "year": first_year + t,
                    "mobile_share": round(float(x_m[i, t]), 4),
                    "mobile_bounce": round(float(y_m[i, t]), 4),
                    "desktop_share": round(float(x_d[i, t]), 4),
                    "desktop_bounce": None if (i, t) == (n_sites - 1, 0) else round(float(y_d[i, t]), 4),
                }
            )
    return rows


def corpus_category_map(rows) -> CategoryMap:
    return CategoryMap({r["domain"]: r["ticker"] for r in rows})
