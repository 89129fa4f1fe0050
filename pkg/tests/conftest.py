from pathlib import Path

import numpy as np
import pytest

from panelfx import build_panel, sample_corpus_path

GOLDEN = Path(__file__).parent / "golden"


def random_panel(rng, n_entities, max_periods, balanced=True, effects_scale=10.0):
    """Random D/Y panel; unbalanced panels draw T_i from 2..max_periods."""
    records = []
    for i in range(n_entities):
        T = max_periods if balanced else int(rng.integers(2, max_periods + 1))
        periods = np.sort(rng.choice(np.arange(2000, 2000 + max_periods), size=T, replace=False))
        u = rng.normal(scale=effects_scale)
        for t in periods:
            d = rng.uniform(0, 100)
            records.append((f"ent{i:02d}", int(t), {"D": d, "Y": 0.7 * d + u + rng.normal(scale=3)}))
    return build_panel(records)


@pytest.fixture
def rng():
    return np.random.default_rng(20240607)


@pytest.fixture
def two_entity_panel():
    return build_panel(
        [
            ("A", 1, {"D": 0.0, "Y": 10.0}),
            ("A", 2, {"D": 1.0, "Y": 12.0}),
            ("B", 1, {"D": 0.0, "Y": 20.0}),
            ("B", 2, {"D": 1.0, "Y": 22.0}),
        ]
    )


@pytest.fixture
def corpus_path():
    return Path(str(sample_corpus_path()))


ACCEPTANCE_LINES: list[str] = []


def report_criterion(tag: str, ok: bool, detail: str) -> None:
    """Record and print one acceptance line, then assert it."""
    line = f"[{'PASS' if ok else 'FAIL'}] {tag}: {detail}"
    ACCEPTANCE_LINES.append(line)
    print(line)
    assert ok, line


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
