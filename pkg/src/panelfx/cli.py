"""Command-line entry point: ``panelfx <command> ...``.

Exit codes: 0 success, 1 usage error, 2 data/validation error, 3 numerical failure.
"""

from __future__ import annotations

import argparse
import csv
import dataclasses
import io
import os
import sys

from . import report as rp
from .errors import DataError, NumericalError
from .modelsel import DEFAULT_ALPHA, breusch_pagan, decide, hausman
from .estimators import fixed_effects_within, random_effects_gls
from .panel import aggregate_by_category, balance_report
from .simulate import SimConfig, Study, generate_corpus, generate_panel, load_sim_config, monte_carlo

EXIT_OK, EXIT_USAGE, EXIT_DATA, EXIT_NUMERIC = 0, 1, 2, 3


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _alpha(args) -> float:
    if args.alpha is not None:
        return args.alpha
    raw = os.environ.get("PANELFX_ALPHA")
    if raw is None:
        return DEFAULT_ALPHA
    try:
        value = float(raw)
    except ValueError:
        raise DataError(f"PANELFX_ALPHA={raw!r} is not a number") from None
    if not 0.0 < value < 1.0:
        raise DataError(f"PANELFX_ALPHA={raw!r} must lie in (0, 1)")
    return value


def _load(args):
    tickers = rp.load_ticker_definitions(args.tickers) if args.tickers else None
    panel, cmap = rp.read_corpus(args.data, tickers)
    if getattr(args, "map", None):
        cmap = rp.load_category_map(args.map, tickers)
    return panel, cmap


def _write_csv(out, header, rows):
    w = csv.writer(out, lineterminator="\n")
    w.writerow(header)
    for row in rows:
        w.writerow(["" if v is None else v for v in row])


def _table(header, rows) -> str:
    cells = [list(map(str, header))] + [["" if v is None else str(v) for v in r] for r in rows]
    widths = [max(len(r[i]) for r in cells) for i in range(len(header))]
    return "\n".join("  ".join(c.ljust(w) for c, w in zip(r, widths)).rstrip() for r in cells) + "\n"


# -- commands -------------------------------------------------------------------


def cmd_validate(args, out):
    panel, cmap = _load(args)
    summary = dataclasses.asdict(balance_report(panel))
    summary["variables"] = list(panel.variables)
    summary["mapped_entities"] = 0 if cmap is None else sum(e in cmap.assignments for e in panel.entities)
    if args.format == "json":
        out.write(rp.dumps_json(summary))
    else:
        rows = [(k, v) for k, v in summary.items()]
        if args.format == "csv":
            _write_csv(out, ("field", "value"), rows)
        else:
            out.write(_table(("field", "value"), rows))


def cmd_aggregate(args, out):
    panel, cmap = _load(args)
    if cmap is None:
        raise DataError("aggregation needs a category map (ticker column or --map)")
    cat = aggregate_by_category(panel, cmap)
    identity = rp.CategoryMap({t: t for t in cat.entities}, cmap.tickers)
    if args.format == "json":
        out.write(rp.dumps_json([
            {"entity": r.entity_id, "time": r.time_id, "values": dict(r.values)} for r in cat.rows
        ]))
    else:
        rp.write_panel_csv(cat, out, identity)


def cmd_fit(args, out):
    panel, cmap = _load(args)
    response, regressor = rp.device_variables(args.device)
    work = rp.level_panel(panel, args.level, cmap)
    model = {"pooled": "pooled", "fe": "fixed_effects", "re": "random_effects"}[args.model]
    d = rp.fit_to_dict(rp.fit_model(work, model, response, regressor), response, regressor)
    if args.format == "json":
        out.write(rp.dumps_json(d))
    elif args.format == "csv":
        keys = [k for k, v in d.items() if not isinstance(v, dict)]
        _write_csv(out, keys, [[d[k] for k in keys]])
    else:
        out.write(rp.render_fit_table(d) + "\n")


def cmd_tests(args, out):
    panel, cmap = _load(args)
    alpha = _alpha(args)
    response, regressor = rp.device_variables(args.device)
    work = rp.level_panel(panel, args.level, cmap)
    bp = breusch_pagan(work, response, regressor, alpha)
    # Hausman is reported even when BP does not reject; the decision ignores it then
    hm = hausman(fixed_effects_within(work, response, regressor), random_effects_gls(work, response, regressor), alpha)
    chosen = decide(bp, hm)
    payload = {
        "device": args.device,
        "level": args.level,
        "breusch_pagan": rp.spectest_to_dict(bp),
        "hausman": rp.spectest_to_dict(hm),
        "chosen_model": chosen.value,
    }
    if args.format == "json":
        out.write(rp.dumps_json(payload))
    elif args.format == "csv":
        rows = [
            (t["test_name"], t["statistic"], t["dof"], t["p_value"], t["reject_null"])
            for t in (payload["breusch_pagan"], payload["hausman"])
        ]
        _write_csv(out, ("test", "statistic", "dof", "p_value", "reject_null"), rows)
    else:
        out.write(rp.render_test_line(payload["breusch_pagan"], "Breusch-Pagan LM") + "\n")
        out.write(rp.render_test_line(payload["hausman"], "Hausman") + "\n")
        out.write(f"Chosen model: {chosen.value}\n")


def cmd_slopes(args, out):
    panel, cmap = _load(args)
    work = rp.level_panel(panel, args.level, cmap)
    rows = rp.slope_table_rows(work)
    if args.format == "json":
        out.write(rp.dumps_json(rows))
    elif args.format == "csv":
        _write_csv(out, rp.SLOPE_COLUMNS, [[r[c] for c in rp.SLOPE_COLUMNS] for r in rows])
    else:
        def fmt(v):
            return "" if v is None else (f"{v:.9g}" if isinstance(v, float) else str(v))
        out.write(_table(rp.SLOPE_COLUMNS, [[fmt(r[c]) for c in rp.SLOPE_COLUMNS] for r in rows]))


def cmd_report(args, out):
    panel, cmap = _load(args)
    reports = rp.run_report(panel, cmap, _alpha(args))
    if args.format == "json":
        out.write(rp.reports_to_json(reports))
    elif args.format == "csv":
        _write_csv(out, rp.SUMMARY_COLUMNS, rp.summary_rows(reports))
    else:
        out.write("\n".join(rp.render_report_table(r) for r in reports))


def _sim_config(args) -> SimConfig:
    cfg = load_sim_config(args.config) if args.config else SimConfig()
    if args.seed is not None:
        cfg = dataclasses.replace(cfg, seed=args.seed)
    return cfg


def cmd_simulate(args, out):
    if args.corpus:
        seed = 42 if args.seed is None else args.seed
        rp.write_records_csv(generate_corpus(seed), out)
        return
    panel = generate_panel(_sim_config(args))
    if args.format == "json":
        out.write(rp.dumps_json([
            {"entity": r.entity_id, "time": r.time_id, "D": r.values["D"], "Y": r.values["Y"]}
            for r in panel.rows
        ]))
    else:
        _write_csv(out, ("entity", "time", "D", "Y"),
                   [(r.entity_id, r.time_id, repr(r.values["D"]), repr(r.values["Y"])) for r in panel.rows])


def cmd_montecarlo(args, out):
    summary = dataclasses.asdict(monte_carlo(_sim_config(args), args.reps, args.study, _alpha(args)))
    if args.format == "json":
        out.write(rp.dumps_json(summary))
    else:
        rows = list(summary.items())
        if args.format == "csv":
            _write_csv(out, ("field", "value"), rows)
        else:
            out.write(_table(("field", "value"), rows))


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="panelfx", description="Panel-data bounce-rate econometrics.")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def data_cmd(name, help_, formats=("json", "csv", "table"), default="table"):
        sp = sub.add_parser(name, help=help_)
        sp.add_argument("data", help="corpus CSV")
        sp.add_argument("--map", help="domain,ticker CSV (overrides the ticker column)")
        sp.add_argument("--tickers", help="ticker,description CSV replacing the default ticker set")
        sp.add_argument("--format", choices=formats, default=default)
        sp.add_argument("-o", "--output", help="write to file instead of stdout")
        sp.add_argument("--alpha", type=float, help="significance level (default $PANELFX_ALPHA or 0.05)")
        return sp

    data_cmd("validate", "check a corpus and summarise its balance").set_defaults(func=cmd_validate)
    data_cmd("aggregate", "average websites into category panels", ("csv", "json"), "csv").set_defaults(
        func=cmd_aggregate
    )
    sp = data_cmd("fit", "fit one model")
    sp.add_argument("--model", choices=("pooled", "fe", "re"), default="fe")
    sp.add_argument("--device", choices=tuple(rp.DEVICE_VARIABLES), default="mobile")
    sp.add_argument("--level", choices=rp.LEVELS, default="website")
    sp.set_defaults(func=cmd_fit)
    sp = data_cmd("tests", "Breusch-Pagan and Hausman tests")
    sp.add_argument("--device", choices=tuple(rp.DEVICE_VARIABLES), default="mobile")
    sp.add_argument("--level", choices=rp.LEVELS, default="website")
    sp.set_defaults(func=cmd_tests)
    sp = data_cmd("slopes", "per-entity slopes for both devices", default="csv")
    sp.add_argument("--level", choices=rp.LEVELS, default="website")
    sp.set_defaults(func=cmd_slopes)
    data_cmd("report", "all four device x level pipelines", default="json").set_defaults(func=cmd_report)

    sp = sub.add_parser("simulate", help="generate a synthetic panel or sample corpus")
    sp.add_argument("--config", help="key = value simulation config")
    sp.add_argument("--seed", type=int)
    sp.add_argument("--corpus", action="store_true", help="emit a website corpus in the ingestion schema")
    sp.add_argument("--format", choices=("csv", "json"), default="csv")
    sp.add_argument("-o", "--output")
    sp.set_defaults(func=cmd_simulate)

    sp = sub.add_parser("montecarlo", help="Monte Carlo study of an estimator or test")
    sp.add_argument("--config", help="key = value simulation config")
    sp.add_argument("--seed", type=int)
    sp.add_argument("--reps", type=int, default=200)
    sp.add_argument("--study", choices=[s.value for s in Study], default="fe_slope")
    sp.add_argument("--format", choices=("json", "csv", "table"), default="json")
    sp.add_argument("--alpha", type=float)
    sp.add_argument("-o", "--output")
    sp.set_defaults(func=cmd_montecarlo)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    buf = io.StringIO()
    try:
        args.func(args, buf)
    except NumericalError as exc:
        print(f"panelfx: numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except (DataError, OSError) as exc:
        print(f"panelfx: {exc}", file=sys.stderr)
        return EXIT_DATA
    text = buf.getvalue()
    if args.output:
        with open(args.output, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
