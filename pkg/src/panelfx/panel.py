"""Long-format panel container, within/between transforms and category aggregation.

A :class:`PanelDataset` holds one :class:`Observation` per (entity, time)
cell. Rows are kept sorted by entity label then time, so every entity's
rows are contiguous and ``group_index`` is a tuple of ranges.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import cached_property
from typing import Iterable, Mapping, Sequence

import numpy as np

from .categories import DEFAULT_TICKERS
from .errors import (
    DataError,
    DuplicateCell,
    EmptyGroup,
    NonFiniteValue,
    OutOfRange,
    UnknownVariable,
    UnmappedEntity,
)

__all__ = [
    "Observation",
    "PanelDataset",
    "FitFrame",
    "CategoryMap",
    "BalanceSummary",
    "build_panel",
    "group_means",
    "within_transform",
    "aggregate_by_category",
    "balance_report",
    "is_bounded_variable",
]


def is_bounded_variable(name: str) -> bool:
    """Shares and bounce rates are percentages and must lie in [0, 100]."""
    return "share" in name or "bounce" in name


@dataclass(frozen=True)
class Observation:
    entity_id: str
    time_id: int
    values: Mapping[str, float] = field(default_factory=dict)


@dataclass(frozen=True)
class FitFrame:
    """Rows carrying both variables of one fit, as parallel arrays.

    ``codes[j]`` indexes ``entities`` for row ``j``; entities with no usable
    row are left out, so ``len(entities)`` is the number of entities in the fit.
    """

    response: str
    regressor: str
    entities: tuple[str, ...]
    codes: np.ndarray
    x: np.ndarray
    y: np.ndarray

    @property
    def n_obs(self) -> int:
        return len(self.y)

    @property
    def n_entities(self) -> int:
        return len(self.entities)

    @cached_property
    def counts(self) -> np.ndarray:
        return np.bincount(self.codes, minlength=self.n_entities)


@dataclass(frozen=True)
class PanelDataset:
    entities: tuple[str, ...]
    times: tuple[int, ...]
    rows: tuple[Observation, ...]
    group_index: tuple[range, ...]

    @property
    def n_rows(self) -> int:
        return len(self.rows)

    @property
    def group_sizes(self) -> tuple[int, ...]:
        return tuple(len(g) for g in self.group_index)

    @cached_property
    def variables(self) -> tuple[str, ...]:
        names = set()
        for row in self.rows:
            names.update(row.values)
        return tuple(sorted(names))

    @cached_property
    def entity_codes(self) -> np.ndarray:
        codes = np.empty(self.n_rows, dtype=np.intp)
        for i, g in enumerate(self.group_index):
            codes[g.start : g.stop] = i
        return codes

    def column(self, variable: str) -> np.ndarray:
        """Values of ``variable`` aligned with rows; NaN where the row omits it."""
        if variable not in self.variables:
            raise UnknownVariable(variable)
        return np.array([row.values.get(variable, math.nan) for row in self.rows], dtype=float)

    def fit_frame(self, response: str, regressor: str) -> FitFrame:
        """Drop rows missing either variable and re-index the surviving entities."""
        y = self.column(response)
        x = self.column(regressor)
        keep = ~(np.isnan(y) | np.isnan(x))
        raw = self.entity_codes[keep]
        present = np.unique(raw)
        remap = np.full(len(self.entities), -1, dtype=np.intp)
        remap[present] = np.arange(len(present))
        return FitFrame(
            response=response,
            regressor=regressor,
            entities=tuple(self.entities[i] for i in present),
            codes=remap[raw],
            x=x[keep],
            y=y[keep],
        )


@dataclass(frozen=True)
class CategoryMap:
    """Website -> ticker assignments, validated against a declared ticker set."""

    assignments: Mapping[str, str]
    tickers: frozenset = frozenset(DEFAULT_TICKERS)

    def __post_init__(self):
        unknown = sorted(set(self.assignments.values()) - set(self.tickers))
        if unknown:
            raise DataError(f"tickers not in the declared set: {unknown}")

    def ticker_of(self, entity: str) -> str:
        try:
            return self.assignments[entity]
        except KeyError:
            raise UnmappedEntity(entity) from None


@dataclass(frozen=True)
class BalanceSummary:
    n_entities: int
    n_times: int
    n_rows: int
    time_span: tuple[int, int] | None
    min_t: int
    max_t: int
    mean_t: float
    balanced: bool


def _coerce_value(row: int, name: str, value) -> float:
    try:
        v = float(value)
    except (TypeError, ValueError):
        raise NonFiniteValue(row, name, value) from None
    if not math.isfinite(v):
        raise NonFiniteValue(row, name, value)
    if is_bounded_variable(name) and not 0.0 <= v <= 100.0:
        raise OutOfRange(name, v, row)
    return v


def build_panel(records: Iterable) -> PanelDataset:
    """Validate records and assemble a :class:`PanelDataset`.

    Parameters
    ----------
    records : iterable
        Either :class:`Observation` instances or ``(entity, time, values)``
        triples. A ``None`` value means the variable is missing for that row.

    Raises
    ------
    DuplicateCell, NonFiniteValue, OutOfRange
        The ``row`` attribute is the position of the offending record in the
        input sequence.
    """
    cells: dict[tuple[str, int], Observation] = {}
    for idx, rec in enumerate(records):
        if isinstance(rec, Observation):
            entity, time, values = rec.entity_id, rec.time_id, rec.values
        else:
            entity, time, values = rec
        entity = str(entity)
        if isinstance(time, float) and not time.is_integer():
            raise DataError(f"row {idx}: time id {time!r} is not an integer")
        time = int(time)
        clean = {
            name: _coerce_value(idx, name, v)
            for name, v in sorted(values.items())
            if v is not None
        }
        key = (entity, time)
        if key in cells:
            raise DuplicateCell(entity, time, idx)
        cells[key] = Observation(entity, time, clean)
    if not cells:
        raise DataError("no records")

    keys = sorted(cells)
    rows = tuple(cells[k] for k in keys)
    entities = tuple(sorted({e for e, _ in keys}))
    times = tuple(sorted({t for _, t in keys}))
    groups = []
    start = 0
    for ent in entities:
        stop = start
        while stop < len(rows) and rows[stop].entity_id == ent:
            stop += 1
        groups.append(range(start, stop))
        start = stop
    return PanelDataset(entities, times, rows, tuple(groups))


def _group_stats(panel: PanelDataset, variable: str):
    values = panel.column(variable)
    present = ~np.isnan(values)
    codes = panel.entity_codes
    counts = np.bincount(codes[present], minlength=len(panel.entities))
    empty = np.flatnonzero(counts == 0)
    if empty.size:
        raise EmptyGroup(panel.entities[empty[0]], variable)
    sums = np.bincount(codes[present], weights=values[present], minlength=len(panel.entities))
    return values, sums / counts


def group_means(panel: PanelDataset, variable: str) -> dict[str, float]:
    """Per-entity arithmetic mean over that entity's available observations."""
    _, means = _group_stats(panel, variable)
    return dict(zip(panel.entities, means.tolist()))


def within_transform(panel: PanelDataset, variable: str) -> np.ndarray:
    """Subtract each entity's mean from its rows (NaN stays NaN for missing cells)."""
    values, means = _group_stats(panel, variable)
    return values - means[panel.entity_codes]


def demean(codes: np.ndarray, values: np.ndarray, n_groups: int) -> tuple[np.ndarray, np.ndarray]:
    """Return ``(demeaned values, group means)`` for integer group codes."""
    counts = np.bincount(codes, minlength=n_groups)
    means = np.bincount(codes, weights=values, minlength=n_groups) / counts
    return values - means[codes], means


def aggregate_by_category(panel: PanelDataset, category_map: CategoryMap) -> PanelDataset:
    """Collapse websites into one observation per (ticker, time).

    Each cell is the unweighted mean, variable by variable, over the member
    websites that carry that variable in that period.
    """
    buckets: dict[tuple[str, int], dict[str, list[float]]] = {}
    for row in panel.rows:
        key = (category_map.ticker_of(row.entity_id), row.time_id)
        slot = buckets.setdefault(key, {})
        for name, v in row.values.items():
            slot.setdefault(name, []).append(v)
    records = [
        (ticker, time, {name: math.fsum(vs) / len(vs) for name, vs in slot.items()})
        for (ticker, time), slot in buckets.items()
    ]
    return build_panel(records)


def balance_report(panel: PanelDataset) -> BalanceSummary:
    sizes = panel.group_sizes
    n_times = len(panel.times)
    return BalanceSummary(
        n_entities=len(panel.entities),
        n_times=n_times,
        n_rows=panel.n_rows,
        time_span=(panel.times[0], panel.times[-1]) if panel.times else None,
        min_t=min(sizes, default=0),
        max_t=max(sizes, default=0),
        mean_t=(sum(sizes) / len(sizes)) if sizes else 0.0,
        balanced=all(s == n_times for s in sizes),
    )


def subset_entities(panel: PanelDataset, entities: Sequence[str]) -> PanelDataset:
    """Panel restricted to the given entity labels."""
    wanted = set(entities)
    return build_panel([r for r in panel.rows if r.entity_id in wanted])
