"""CSV ingestion, category maps, the end-to-end pipeline and report rendering.

Input CSV schema (UTF-8, ``.`` decimal point, empty cell = missing)::

    domain,ticker,year,mobile_share,mobile_bounce,desktop_share,desktop_bounce

The ``ticker`` column may be blank; when present it doubles as the category
map. A separate ``domain,ticker`` file can be supplied instead.
"""

from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import dataclass
from typing import Mapping, Sequence

import numpy as np

from .categories import DEFAULT_TICKERS
from .errors import (
    DataError,
    DuplicateCell,
    DuplicateDomain,
    NonFiniteValue,
    OutOfRange,
    ParseError,
    SchemaMismatch,
    UnknownTicker,
    UnknownVariable,
)
from .estimators import (
    EntitySlope,
    FixedEffectsFit,
    RandomEffectsFit,
    entity_slopes,
    fixed_effects_within,
    pooled_ols,
    random_effects_gls,
)
from .modelsel import DEFAULT_ALPHA, Model, Selection, SpecTestResult, select_model
from .numstats import RegressionFit
from .panel import CategoryMap, PanelDataset, aggregate_by_category, build_panel

__all__ = [
    "CSV_COLUMNS",
    "DEVICE_VARIABLES",
    "SignAgreement",
    "PipelineReport",
    "read_corpus",
    "ingest_csv",
    "write_panel_csv",
    "load_ticker_definitions",
    "load_category_map",
    "sign_agreement",
    "run_pipeline",
    "run_report",
    "format_p",
    "report_to_dict",
    "reports_to_json",
    "render_report_table",
    "slope_table_rows",
]

CSV_COLUMNS = (
    "domain",
    "ticker",
    "year",
    "mobile_share",
    "mobile_bounce",
    "desktop_share",
    "desktop_bounce",
)
VALUE_COLUMNS = CSV_COLUMNS[3:]

# device -> (response, regressor)
DEVICE_VARIABLES = {
    "mobile": ("mobile_bounce", "mobile_share"),
    "desktop": ("desktop_bounce", "desktop_share"),
}
LEVELS = ("website", "category")


# -- ingestion -------------------------------------------------------------------


def _open_text(source):
    if isinstance(source, io.TextIOBase):
        return source, False
    return open(source, newline="", encoding="utf-8"), True


def read_corpus(source, tickers=None) -> tuple[PanelDataset, CategoryMap | None]:
    """Parse a corpus CSV into a panel and, if the ticker column is filled, a category map."""
    tickers = frozenset(tickers if tickers is not None else DEFAULT_TICKERS)
    fh, close = _open_text(source)
    try:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header is None:
            raise SchemaMismatch(1, "empty file")
        header = [h.strip() for h in header]
        missing = [c for c in CSV_COLUMNS if c not in header]
        extra = [c for c in header if c not in CSV_COLUMNS]
        if missing or extra or len(set(header)) != len(header):
            raise SchemaMismatch(1, f"(missing {missing}, unexpected {extra})")
        pos = {name: header.index(name) for name in CSV_COLUMNS}

        records, lines = [], []
        assignments: dict[str, str] = {}
        for lineno, fields in enumerate(reader, start=2):
            if not fields or all(not f.strip() for f in fields):
                continue
            if len(fields) != len(header):
                raise SchemaMismatch(lineno, f"expected {len(header)} fields, got {len(fields)}")
            cell = {name: fields[i].strip() for name, i in pos.items()}
            domain = cell["domain"]
            if not domain:
                raise ParseError(lineno, "domain", "")
            try:
                year = int(cell["year"])
            except ValueError:
                raise ParseError(lineno, "year", cell["year"]) from None
            values = {}
            for name in VALUE_COLUMNS:
                raw = cell[name]
                if raw == "":
                    values[name] = None
                    continue
                try:
                    values[name] = float(raw)
                except ValueError:
                    raise ParseError(lineno, name, raw) from None
            ticker = cell["ticker"]
            if ticker:
                if ticker not in tickers:
                    raise UnknownTicker(lineno, ticker)
                if assignments.setdefault(domain, ticker) != ticker:
                    raise DuplicateDomain(lineno, domain)
            records.append((domain, year, values))
            lines.append(lineno)
    finally:
        if close:
            fh.close()
    if not records:
        raise SchemaMismatch(2, "no data rows")
    try:
        panel = build_panel(records)
    except (DuplicateCell, NonFiniteValue, OutOfRange) as exc:
        exc.line = lines[exc.row]
        exc.args = (f"line {exc.line}: {exc}",)
        raise
    cmap = CategoryMap(assignments, tickers) if assignments else None
    return panel, cmap


def ingest_csv(source) -> PanelDataset:
    return read_corpus(source)[0]


def _fmt_value(v: float) -> str:
    return repr(float(v))


def write_panel_csv(panel: PanelDataset, dest, category_map: CategoryMap | None = None) -> None:
    """Write a panel in the ingestion schema; floats use shortest round-trip repr."""
    fh, close = (dest, False) if hasattr(dest, "write") else (open(dest, "w", newline="", encoding="utf-8"), True)
    try:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(CSV_COLUMNS)
        for row in panel.rows:
            ticker = category_map.assignments.get(row.entity_id, "") if category_map else ""
            w.writerow(
                [row.entity_id, ticker, row.time_id]
                + [_fmt_value(row.values[c]) if c in row.values else "" for c in VALUE_COLUMNS]
            )
    finally:
        if close:
            fh.close()


def write_records_csv(rows: Sequence[Mapping], dest) -> None:
    """Write raw corpus dicts (as produced by the generator) in the schema."""
    w = csv.writer(dest, lineterminator="\n")
    w.writerow(CSV_COLUMNS)
    for r in rows:
        w.writerow(["" if r[c] is None else r[c] for c in CSV_COLUMNS])


def load_ticker_definitions(path) -> dict[str, str]:
    """``ticker,description`` CSV (header optional) -> ordered mapping."""
    out: dict[str, str] = {}
    with open(path, newline="", encoding="utf-8") as fh:
        for lineno, fields in enumerate(csv.reader(fh), start=1):
            if not fields or not fields[0].strip():
                continue
            if lineno == 1 and fields[0].strip().lower() == "ticker":
                continue
            ticker = fields[0].strip()
            desc = fields[1].strip() if len(fields) > 1 else ""
            if ticker in out:
                raise DataError(f"line {lineno}: ticker {ticker!r} defined twice")
            out[ticker] = desc
    return out


def load_category_map(path, tickers=None) -> CategoryMap:
    """``domain,ticker`` CSV (header optional) -> :class:`CategoryMap`."""
    tickers = frozenset(tickers if tickers is not None else DEFAULT_TICKERS)
    assignments: dict[str, str] = {}
    with open(path, newline="", encoding="utf-8") as fh:
        for lineno, fields in enumerate(csv.reader(fh), start=1):
            if not fields or all(not f.strip() for f in fields):
                continue
            if len(fields) != 2:
                raise SchemaMismatch(lineno, "expected domain,ticker")
            domain, ticker = fields[0].strip(), fields[1].strip()
            if lineno == 1 and (domain.lower(), ticker.lower()) == ("domain", "ticker"):
                continue
            if ticker not in tickers:
                raise UnknownTicker(lineno, ticker)
            if domain in assignments:
                raise DuplicateDomain(lineno, domain)
            assignments[domain] = ticker
    return CategoryMap(assignments, tickers)


# -- sign agreement ----------------------------------------------------------------


@dataclass(frozen=True)
class SignAgreement:
    matches: int
    mismatches: int
    degenerate: int
    detail: tuple[dict, ...]


def sign_agreement(
    entity_slopes: Sequence[EntitySlope], category_slopes, category_map: CategoryMap
) -> SignAgreement:
    """Compare each website's slope sign with its category's.

    ``category_slopes`` is a sequence of :class:`EntitySlope` keyed by ticker
    or a plain ``ticker -> slope`` mapping. Zero is its own sign. Degenerate
    website slopes (and slopes of degenerate categories) are counted apart.
    """
    if isinstance(category_slopes, Mapping):
        cats = {k: EntitySlope(k, float(v), False) for k, v in category_slopes.items()}
    else:
        cats = {s.entity: s for s in category_slopes}
    matches = mismatches = degenerate = 0
    detail = []
    for es in entity_slopes:
        ticker = category_map.ticker_of(es.entity)
        if ticker not in cats:
            raise DataError(f"no category slope for ticker {ticker!r}")
        cs = cats[ticker]
        if es.degenerate or cs.degenerate:
            outcome = "degenerate"
            degenerate += 1
        elif np.sign(es.slope) == np.sign(cs.slope):
            outcome = "match"
            matches += 1
        else:
            outcome = "mismatch"
            mismatches += 1
        detail.append(
            {
                "entity": es.entity,
                "ticker": ticker,
                "entity_slope": es.slope,
                "category_slope": cs.slope,
                "outcome": outcome,
            }
        )
    return SignAgreement(matches, mismatches, degenerate, tuple(detail))


# -- pipeline --------------------------------------------------------------------


@dataclass(frozen=True)
class PipelineReport:
    device: str
    level: str
    response: str
    regressor: str
    alpha: float
    selection: Selection
    fit: object
    fixed_effects: FixedEffectsFit
    entity_slopes: tuple[EntitySlope, ...]
    sign_agreement: SignAgreement | None

    @property
    def chosen_model(self) -> Model:
        return self.selection.chosen


def device_variables(device: str) -> tuple[str, str]:
    try:
        return DEVICE_VARIABLES[device]
    except KeyError:
        raise DataError(f"unknown device {device!r}") from None


def level_panel(panel: PanelDataset, level: str, category_map: CategoryMap | None) -> PanelDataset:
    if level == "website":
        return panel
    if level == "category":
        if category_map is None:
            raise DataError("category level requires a category map")
        return aggregate_by_category(panel, category_map)
    raise DataError(f"unknown level {level!r}")


def fit_model(panel: PanelDataset, model, response: str, regressor: str):
    model = Model(model)
    if model is Model.POOLED:
        return pooled_ols(panel, response, regressor)
    if model is Model.RANDOM_EFFECTS:
        return random_effects_gls(panel, response, regressor)
    return fixed_effects_within(panel, response, regressor)


def run_pipeline(
    panel: PanelDataset,
    device: str,
    level: str,
    category_map: CategoryMap | None = None,
    alpha: float = DEFAULT_ALPHA,
) -> PipelineReport:
    """Test, select and fit one device/level combination.

    The fixed-effects fit and its entity slopes are always computed. At the
    website level with a category map, website slopes are also compared in
    sign with the category-level slopes.
    """
    response, regressor = device_variables(device)
    for var in (response, regressor):
        if var not in panel.variables:
            raise UnknownVariable(var)
    work = level_panel(panel, level, category_map)
    sel = select_model(work, response, regressor, alpha)
    fe = fixed_effects_within(work, response, regressor)
    fit = fe if sel.chosen is Model.FIXED_EFFECTS else fit_model(work, sel.chosen, response, regressor)
    agreement = None
    if level == "website" and category_map is not None:
        cat = aggregate_by_category(panel, category_map)
        agreement = sign_agreement(fe.entity_slopes, entity_slopes(cat, response, regressor), category_map)
    return PipelineReport(
        device, level, response, regressor, alpha, sel, fit, fe, fe.entity_slopes, agreement
    )


def run_report(
    panel: PanelDataset, category_map: CategoryMap | None, alpha: float = DEFAULT_ALPHA
) -> list[PipelineReport]:
    """All four device x level combinations, in a fixed order."""
    if category_map is None:
        raise DataError("the full report needs a category map (ticker column or --map)")
    return [
        run_pipeline(panel, device, level, category_map, alpha)
        for device in DEVICE_VARIABLES
        for level in LEVELS
    ]


# -- serialisation -------------------------------------------------------------------


def format_p(p: float) -> str:
    """Display rule for p-values in human-readable tables."""
    if p < 2.2e-16:
        return "< 2.2e-16"
    if p < 1e-3:
        return "<0.001"
    return f"{p:.3f}"


def _num(v):
    v = float(v)
    return v if math.isfinite(v) else None


def spectest_to_dict(t: SpecTestResult | None):
    if t is None:
        return None
    return {
        "test_name": t.test_name,
        "statistic": _num(t.statistic),
        "dof": t.dof,
        "p_value": _num(t.p_value),
        "p_display": format_p(t.p_value),
        "alpha": t.alpha,
        "reject_null": t.reject_null,
        "note": t.note,
    }


def fit_to_dict(fit, response: str, regressor: str) -> dict:
    if isinstance(fit, FixedEffectsFit):
        return {
            "model": Model.FIXED_EFFECTS.value,
            "response": response,
            "regressor": regressor,
            "estimate": _num(fit.delta),
            "se": _num(fit.se),
            "t_stat": _num(fit.t_stat),
            "p_value": _num(fit.p_value),
            "p_display": format_p(fit.p_value),
            "ci_low": _num(fit.ci_low),
            "ci_high": _num(fit.ci_high),
            "n_obs": fit.n_obs,
            "n_entities": fit.n_entities,
            "dof": fit.dof,
            "sigma2": _num(fit.sigma2),
            "r_squared": _num(fit.r_squared_within),
            "adj_r_squared": _num(fit.adj_r_squared),
            "entity_effects": {k: _num(v) for k, v in fit.entity_effects.items()},
        }
    if isinstance(fit, RandomEffectsFit):
        return {
            "model": Model.RANDOM_EFFECTS.value,
            "response": response,
            "regressor": regressor,
            "estimate": _num(fit.delta),
            "se": _num(fit.se_delta),
            "t_stat": _num(fit.t_stat),
            "p_value": _num(fit.p_value),
            "p_display": format_p(fit.p_value),
            "ci_low": _num(fit.ci_low),
            "ci_high": _num(fit.ci_high),
            "n_obs": fit.n_obs,
            "n_entities": fit.n_entities,
            "dof": fit.dof,
            "intercept": _num(fit.intercept),
            "se_intercept": _num(fit.se_intercept),
            "sigma2_e": _num(fit.sigma2_e),
            "sigma2_u": _num(fit.sigma2_u),
            "sigma2_u_clamped": fit.clamped,
            "theta": {k: _num(v) for k, v in fit.theta.items()},
        }
    if isinstance(fit, RegressionFit):
        j = fit.names.index(regressor)
        c = fit.names.index("const")
        return {
            "model": Model.POOLED.value,
            "response": response,
            "regressor": regressor,
            "estimate": _num(fit.coefficients[j]),
            "se": _num(fit.standard_errors[j]),
            "t_stat": _num(fit.t_stats[j]),
            "p_value": _num(fit.p_values[j]),
            "p_display": format_p(fit.p_values[j]),
            "ci_low": _num(fit.ci_low[j]),
            "ci_high": _num(fit.ci_high[j]),
            "n_obs": fit.n_obs,
            "dof": fit.dof,
            "intercept": _num(fit.coefficients[c]),
            "se_intercept": _num(fit.standard_errors[c]),
            "sigma2": _num(fit.sigma2),
            "r_squared": _num(fit.r_squared),
            "adj_r_squared": _num(fit.adj_r_squared),
        }
    raise TypeError(f"cannot serialise {type(fit).__name__}")


def report_to_dict(rep: PipelineReport) -> dict:
    sa = rep.sign_agreement
    return {
        "device": rep.device,
        "level": rep.level,
        "response": rep.response,
        "regressor": rep.regressor,
        "alpha": rep.alpha,
        "breusch_pagan": spectest_to_dict(rep.selection.breusch_pagan),
        "hausman": spectest_to_dict(rep.selection.hausman),
        "chosen_model": rep.chosen_model.value,
        "fit": fit_to_dict(rep.fit, rep.response, rep.regressor),
        "fixed_effects": fit_to_dict(rep.fixed_effects, rep.response, rep.regressor),
        "entity_slopes": [
            {"entity": s.entity, "slope": _num(s.slope), "degenerate": s.degenerate}
            for s in rep.entity_slopes
        ],
        "sign_agreement": None
        if sa is None
        else {
            "matches": sa.matches,
            "mismatches": sa.mismatches,
            "degenerate": sa.degenerate,
            "detail": [dict(d, entity_slope=_num(d["entity_slope"]), category_slope=_num(d["category_slope"])) for d in sa.detail],
        },
    }


def dumps_json(obj) -> str:
    return json.dumps(obj, indent=2, allow_nan=False, ensure_ascii=False) + "\n"


def reports_to_json(reports: Sequence[PipelineReport]) -> str:
    return dumps_json([report_to_dict(r) for r in reports])


# -- human-readable tables -------------------------------------------------------------

_MODEL_TITLES = {
    Model.POOLED.value: "Pooled OLS",
    Model.RANDOM_EFFECTS.value: "Random effects (GLS)",
    Model.FIXED_EFFECTS.value: "Fixed effects (within)",
}


def render_fit_table(d: dict) -> str:
    """Estimates / CI / p block in the layout of a regression summary table."""
    rows = [
        ("Predictors", "Estimates", "CI", "p"),
        (
            d["regressor"],
            f"{d['estimate']:.2f}",
            f"{d['ci_low']:.2f} – {d['ci_high']:.2f}",
            d["p_display"],
        ),
        ("Observations", str(d["n_obs"]), "", ""),
    ]
    if d.get("r_squared") is not None:
        rows.append(("R² / R² adjusted", f"{d['r_squared']:.3f} / {d['adj_r_squared']:.3f}", "", ""))
    widths = [max(len(r[i]) for r in rows) for i in range(4)]
    lines = [f"{_MODEL_TITLES[d['model']]}: dependent variable {d['response']}"]
    for r in rows:
        lines.append("  ".join(c.ljust(w) for c, w in zip(r, widths)).rstrip())
    return "\n".join(lines)


def render_test_line(d: dict | None, label: str) -> str:
    if d is None:
        return f"{label}: not run"
    stat = "n/a" if d["statistic"] is None else f"{d['statistic']:.4f}"
    verdict = "reject H0" if d["reject_null"] else "fail to reject H0"
    line = f"{label}: statistic = {stat}, df = {d['dof']}, p = {d['p_display']} -> {verdict}"
    if d["note"]:
        line += f" ({d['note']})"
    return line


def render_report_table(rep: PipelineReport) -> str:
    d = report_to_dict(rep)
    parts = [
        f"== {d['device']} / {d['level']} ==",
        render_test_line(d["breusch_pagan"], "Breusch-Pagan LM"),
        render_test_line(d["hausman"], "Hausman"),
        f"Chosen model: {d['chosen_model']}",
        "",
        render_fit_table(d["fixed_effects"]),
    ]
    if d["chosen_model"] != Model.FIXED_EFFECTS.value:
        parts += ["", render_fit_table(d["fit"])]
    sa = d["sign_agreement"]
    if sa is not None:
        parts += [
            "",
            f"Sign agreement with category slopes: {sa['matches']} match, "
            f"{sa['mismatches']} differ, {sa['degenerate']} degenerate",
        ]
    return "\n".join(parts) + "\n"


SUMMARY_COLUMNS = (
    "device", "level", "chosen_model", "bp_p", "hausman_p", "fe_estimate", "fe_ci_low",
    "fe_ci_high", "fe_p", "n_obs", "r_squared", "adj_r_squared",
)


def summary_rows(reports: Sequence[PipelineReport]) -> list[list]:
    out = []
    for rep in reports:
        d = report_to_dict(rep)
        fe = d["fixed_effects"]
        out.append(
            [
                d["device"], d["level"], d["chosen_model"], d["breusch_pagan"]["p_value"],
                None if d["hausman"] is None else d["hausman"]["p_value"],
                fe["estimate"], fe["ci_low"], fe["ci_high"], fe["p_value"], fe["n_obs"],
                fe["r_squared"], fe["adj_r_squared"],
            ]
        )
    return out


def slope_table_rows(panel: PanelDataset) -> list[dict]:
    """One row per entity with per-device slopes and degeneracy flags.

    Devices whose variables are absent from the panel are reported as ``None``.
    """
    per_device = {}
    for device, (resp, reg) in DEVICE_VARIABLES.items():
        if resp in panel.variables and reg in panel.variables:
            per_device[device] = {s.entity: s for s in entity_slopes(panel, resp, reg)}
    rows = []
    for ent in panel.entities:
        row = {"entity": ent}
        for device in DEVICE_VARIABLES:
            s = per_device.get(device, {}).get(ent)
            row[f"{device}_slope"] = None if s is None else s.slope
            row[f"{device}_degenerate"] = None if s is None else s.degenerate
        rows.append(row)
    return rows


SLOPE_COLUMNS = ("entity", "mobile_slope", "desktop_slope", "mobile_degenerate", "desktop_degenerate")
