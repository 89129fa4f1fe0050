import json
import subprocess
import sys

import pytest

from panelfx.cli import main
from panelfx.report import CSV_COLUMNS

from conftest import GOLDEN


def run(capsys, *argv):
    code = main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


@pytest.fixture
def constant_share_csv(tmp_path):
    p = tmp_path / "flat.csv"
    rows = [",".join(CSV_COLUMNS)]
    for site in ("a.com", "b.com", "c.com"):
        for year in (2017, 2018, 2019):
            rows.append(f"{site},G,{year},50,{40 + year - 2017},50,30")
    p.write_text("\n".join(rows) + "\n")
    return p


def test_report_matches_golden(capsys, corpus_path):
    code, out, _ = run(capsys, "report", str(corpus_path))
    assert code == 0
    assert out == (GOLDEN / "report_sample.json").read_text(encoding="utf-8")


def test_report_output_file(tmp_path, corpus_path, capsys):
    dest = tmp_path / "r.json"
    assert main(["report", str(corpus_path), "-o", str(dest)]) == 0
    assert capsys.readouterr().out == ""
    assert len(json.loads(dest.read_text())) == 4


@pytest.mark.parametrize("fmt", ["csv", "table"])
def test_report_formats_deterministic(capsys, corpus_path, fmt):
    a = run(capsys, "report", str(corpus_path), "--format", fmt)[1]
    b = run(capsys, "report", str(corpus_path), "--format", fmt)[1]
    assert a == b and a


def test_validate(capsys, corpus_path):
    code, out, _ = run(capsys, "validate", str(corpus_path), "--format", "json")
    d = json.loads(out)
    assert code == 0 and d["n_entities"] == 30 and d["n_rows"] == 120 and d["mapped_entities"] == 30


def test_aggregate(capsys, corpus_path):
    code, out, _ = run(capsys, "aggregate", str(corpus_path))
    lines = out.splitlines()
    assert code == 0 and lines[0] == ",".join(CSV_COLUMNS) and len(lines) == 1 + 24


@pytest.mark.parametrize("model,key", [("pooled", "pooled"), ("fe", "fixed_effects"), ("re", "random_effects")])
def test_fit_models(capsys, corpus_path, model, key):
    code, out, _ = run(capsys, "fit", str(corpus_path), "--model", model, "--format", "json")
    assert code == 0 and json.loads(out)["model"] == key


def test_fit_table(capsys, corpus_path):
    code, out, _ = run(capsys, "fit", str(corpus_path), "--level", "category", "--device", "desktop")
    assert code == 0 and "Predictors" in out and "desktop_share" in out


def test_tests_subcommand(capsys, corpus_path):
    code, out, _ = run(capsys, "tests", str(corpus_path), "--format", "json")
    d = json.loads(out)
    assert code == 0 and d["chosen_model"] == "fixed_effects"
    assert d["breusch_pagan"]["dof"] == 1 and d["hausman"]["dof"] == 1


def test_slopes(capsys, corpus_path):
    code, out, _ = run(capsys, "slopes", str(corpus_path))
    lines = out.splitlines()
    assert code == 0
    assert lines[0] == "entity,mobile_slope,desktop_slope,mobile_degenerate,desktop_degenerate"
    assert len(lines) == 31


def test_alpha_from_environment(capsys, corpus_path, monkeypatch):
    monkeypatch.setenv("PANELFX_ALPHA", "0.001")
    d = json.loads(run(capsys, "tests", str(corpus_path), "--format", "json")[1])
    assert d["hausman"]["alpha"] == 0.001
    # Hausman p on this corpus is about 0.004, so a stricter alpha flips the choice
    assert d["chosen_model"] == "random_effects"
    d = json.loads(run(capsys, "tests", str(corpus_path), "--format", "json", "--alpha", "0.05")[1])
    assert d["hausman"]["alpha"] == 0.05


def test_bad_alpha_environment(capsys, corpus_path, monkeypatch):
    monkeypatch.setenv("PANELFX_ALPHA", "lots")
    assert run(capsys, "tests", str(corpus_path))[0] == 2


def test_simulate_deterministic(capsys):
    a = run(capsys, "simulate", "--seed", "7")[1]
    b = run(capsys, "simulate", "--seed", "7")[1]
    assert a == b and len(a.splitlines()) == 121


def test_simulate_corpus_reproduces_bundled_file(capsys, corpus_path):
    out = run(capsys, "simulate", "--corpus", "--seed", "42")[1]
    assert out == corpus_path.read_text(encoding="utf-8")


def test_simulate_config(capsys, tmp_path):
    cfg = tmp_path / "sim.cfg"
    cfg.write_text("n_entities = 5\nperiods = 3\n")
    d = json.loads(run(capsys, "simulate", "--config", str(cfg), "--format", "json")[1])
    assert len(d) == 15


def test_montecarlo(capsys):
    code, out, _ = run(capsys, "montecarlo", "--reps", "10", "--study", "bp_test")
    d = json.loads(out)
    assert code == 0 and d["reps"] == 10 and d["rejection_rate"] is not None


def test_usage_error(capsys):
    with pytest.raises(SystemExit) as err:
        main(["fit", "x.csv", "--model", "gmm"])
    assert err.value.code == 1
    with pytest.raises(SystemExit) as err:
        main([])
    assert err.value.code == 1


def test_data_error(capsys, tmp_path):
    bad = tmp_path / "bad.csv"
    bad.write_text("domain,year\na.com,2017\n")
    code, _, err = run(capsys, "validate", str(bad))
    assert code == 2 and "line 1" in err
    assert run(capsys, "validate", str(tmp_path / "missing.csv"))[0] == 2


def test_numerical_error(capsys, constant_share_csv):
    code, _, err = run(capsys, "fit", str(constant_share_csv))
    assert code == 3 and "numerical" in err


def test_console_script_entry():
    proc = subprocess.run(
        [sys.executable, "-m", "panelfx.cli", "fit", "nope.csv", "--model", "bad"],
        capture_output=True,
        text=True,
    )
    assert proc.returncode == 1
