import math
import random

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from panelfx.errors import (
    DuplicateCell,
    EmptyGroup,
    NonFiniteValue,
    OutOfRange,
    UnknownVariable,
    UnmappedEntity,
)
from panelfx.panel import (
    CategoryMap,
    aggregate_by_category,
    balance_report,
    build_panel,
    group_means,
    within_transform,
)


def kahan_sum(values):
    total = 0.0
    comp = 0.0
    for v in values:
        y = v - comp
        t = total + y
        comp = (t - total) - y
        total = t
    return total


def sites_records():
    return [
        (site, year, {"mobile_share": 10.0 * k + year - 2017, "mobile_bounce": 40.0 + k})
        for k, site in enumerate(["cvs.com", "adidas.com"])
        for year in range(2017, 2021)
    ]


def test_two_sites_four_years():
    panel = build_panel(sites_records())
    assert panel.entities == ("adidas.com", "cvs.com")
    assert panel.times == (2017, 2018, 2019, 2020)
    assert panel.group_sizes == (4, 4)
    assert panel.n_rows == 8


def test_duplicate_cell_rejected():
    recs = sites_records() + [("cvs.com", 2018, {"mobile_share": 1.0})]
    with pytest.raises(DuplicateCell) as err:
        build_panel(recs)
    assert (err.value.entity, err.value.time) == ("cvs.com", 2018)


@pytest.mark.parametrize("bad", [math.nan, math.inf, "abc"])
def test_non_finite_rejected(bad):
    with pytest.raises(NonFiniteValue):
        build_panel([("a.com", 2017, {"D": bad})])


@pytest.mark.parametrize("value", [-0.1, 100.5])
def test_share_bounce_range(value):
    with pytest.raises(OutOfRange):
        build_panel([("a.com", 2017, {"mobile_bounce": value})])
    # unbounded variable names are not range-checked
    build_panel([("a.com", 2017, {"D": value})])


def test_large_unbalanced_corpus_shape():
    entities = [f"site{i:04d}.com" for i in range(1126)]
    cells = [(e, y) for e in entities for y in range(2017, 2021)]
    dropped = set(cells[5::250][:18])
    assert len(dropped) == 18
    recs = [(e, y, {"mobile_share": 50.0}) for e, y in cells if (e, y) not in dropped]
    panel = build_panel(recs)
    assert panel.n_rows == 4486
    assert len(panel.entities) == 1126
    rep = balance_report(panel)
    assert not rep.balanced
    assert rep.n_times == 4 and rep.min_t == 3 and rep.max_t == 4


def test_group_index_partitions_rows(rng):
    recs = [(f"e{rng.integers(0, 9)}", int(t), {"D": float(rng.normal())}) for t in range(40)]
    panel = build_panel(recs)
    covered = sorted(i for g in panel.group_index for i in g)
    assert covered == list(range(panel.n_rows))
    assert sum(panel.group_sizes) == panel.n_rows
    for ent, g in zip(panel.entities, panel.group_index):
        assert all(panel.rows[i].entity_id == ent for i in g)


def test_construction_is_order_independent():
    recs = sites_records()
    shuffled = recs[:]
    random.Random(3).shuffle(shuffled)
    assert build_panel(recs) == build_panel(shuffled)


def test_group_means_trivial():
    panel = build_panel(
        [("a", t, {"D": v}) for t, v in zip(range(4), [1, 2, 3, 4])] + [("b", 0, {"D": 7.0})]
    )
    assert group_means(panel, "D") == {"a": 2.5, "b": 7.0}


def test_group_means_against_compensated_sum(rng):
    recs = []
    for i in range(12):
        for t in range(int(rng.integers(1, 9))):
            recs.append((f"e{i}", t, {"D": float(rng.normal(1e3, 50.0))}))
    panel = build_panel(recs)
    means = group_means(panel, "D")
    for ent in panel.entities:
        vals = [r.values["D"] for r in panel.rows if r.entity_id == ent]
        oracle = kahan_sum(vals) / len(vals)
        assert means[ent] == pytest.approx(oracle, rel=1e-12)


def test_group_means_errors():
    panel = build_panel([("a", 1, {"D": 1.0}), ("b", 1, {"Y": 2.0})])
    with pytest.raises(UnknownVariable):
        group_means(panel, "Z")
    with pytest.raises(EmptyGroup):
        group_means(panel, "D")


def test_within_transform_values():
    panel = build_panel(
        [("a", t, {"D": float(v)}) for t, v in enumerate([1, 2, 3, 4])]
        + [("b", t, {"D": 5.0}) for t in range(3)]
    )
    np.testing.assert_array_equal(within_transform(panel, "D"), [-1.5, -0.5, 0.5, 1.5, 0, 0, 0])


def test_within_transform_idempotent(rng):
    recs = [(f"e{i}", t, {"D": float(rng.normal(20, 5))}) for i in range(6) for t in range(5)]
    panel = build_panel(recs)
    once = within_transform(panel, "D")
    again = build_panel(
        [(r.entity_id, r.time_id, {"D": float(v)}) for r, v in zip(panel.rows, once)]
    )
    np.testing.assert_allclose(within_transform(again, "D"), once, rtol=0, atol=1e-12)


@settings(max_examples=60, deadline=None)
@given(
    st.lists(
        st.lists(st.floats(-1e6, 1e6, allow_nan=False), min_size=1, max_size=8),
        min_size=1,
        max_size=10,
    )
)
def test_demeaned_sums_vanish(groups):
    recs = [(f"e{i:02d}", t, {"D": v}) for i, g in enumerate(groups) for t, v in enumerate(g)]
    panel = build_panel(recs)
    dm = within_transform(panel, "D")
    for g, rng_ in zip(groups, panel.group_index):
        bound = 1e-12 * len(g) * max(abs(v) for v in g)
        assert abs(math.fsum(dm[rng_.start : rng_.stop])) <= bound


def test_aggregate_mean_of_two():
    panel = build_panel(
        [
            ("a.com", 2018, {"mobile_share": 40.0}),
            ("b.com", 2018, {"mobile_share": 60.0}),
        ]
    )
    cat = aggregate_by_category(panel, CategoryMap({"a.com": "CSJWAR", "b.com": "CSJWAR"}))
    assert cat.entities == ("CSJWAR",)
    assert cat.rows[0].values == {"mobile_share": 50.0}


def test_aggregate_uses_only_members_with_the_variable():
    panel = build_panel(
        [
            ("a.com", 2018, {"mobile_share": 40.0, "mobile_bounce": 30.0}),
            ("b.com", 2018, {"mobile_share": 60.0}),
        ]
    )
    cat = aggregate_by_category(panel, CategoryMap({"a.com": "G", "b.com": "G"}))
    assert cat.rows[0].values == {"mobile_bounce": 30.0, "mobile_share": 50.0}


def test_aggregate_identity_and_shape(rng):
    tickers = sorted(CategoryMap({}).tickers)
    assert len(tickers) == 30
    recs = [
        (t, y, {"mobile_share": float(rng.uniform(0, 100))}) for t in tickers for y in range(2017, 2021)
    ]
    panel = build_panel(recs)
    cat = aggregate_by_category(panel, CategoryMap({t: t for t in tickers}))
    assert cat.n_rows == 120
    for a, b in zip(panel.rows, cat.rows):
        assert a.values["mobile_share"] == b.values["mobile_share"]


def test_aggregate_conservation(rng):
    sites = [f"s{i}.com" for i in range(25)]
    cmap = CategoryMap({s: ["AAR", "BPR", "G", "MS"][i % 4] for i, s in enumerate(sites)})
    recs = [(s, y, {"D": float(rng.normal(50, 10))}) for s in sites for y in range(3)]
    panel = build_panel(recs)
    cat = aggregate_by_category(panel, cmap)
    for row in cat.rows:
        members = [
            r.values["D"] for r in panel.rows
            if cmap.assignments[r.entity_id] == row.entity_id and r.time_id == row.time_id
        ]
        assert row.values["D"] * len(members) == pytest.approx(math.fsum(members), rel=1e-12)


def test_aggregate_unmapped():
    panel = build_panel([("a.com", 2018, {"D": 1.0})])
    with pytest.raises(UnmappedEntity):
        aggregate_by_category(panel, CategoryMap({}))


def test_balance_report():
    recs = [(f"e{i}", t, {"D": 1.0}) for i in range(30) for t in range(4)]
    rep = balance_report(build_panel(recs))
    assert rep.balanced and rep.min_t == rep.max_t == 4 and rep.n_entities == 30
    rep = balance_report(build_panel(recs[1:]))
    assert not rep.balanced and rep.min_t == 3
