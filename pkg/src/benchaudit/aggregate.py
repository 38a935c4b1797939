"""Seed/horizon aggregation, average-rank tables and win rates."""

from __future__ import annotations

import csv
import math
from collections import defaultdict
from dataclasses import dataclass
from enum import Enum
from typing import Mapping, Sequence

import numpy as np

from .errors import (
    EmptyCube,
    IncompleteTable,
    MetricAbsent,
    MissingCell,
    MissingColumn,
    NegativeError,
    ValidationError,
)
from .results import ErrorMetricKind, ResultRecord, ResultsCube, _first_seen, parse_real


class Statistic(str, Enum):
    MEAN = "MEAN_OVER_SEEDS"
    MIN = "MIN_OVER_SEEDS"

    @classmethod
    def parse(cls, text) -> "Statistic":
        if isinstance(text, Statistic):
            return text
        key = str(text).strip().upper()
        if key in ("MEAN", "MEAN_OVER_SEEDS"):
            return cls.MEAN
        if key in ("MIN", "MIN_OVER_SEEDS"):
            return cls.MIN
        raise ValidationError(f"unknown statistic {text!r} (expected mean or min)")


class Granularity(str, Enum):
    PER_HORIZON = "PER_HORIZON"
    PER_DATASET = "PER_DATASET"


def aggregate_seeds(cube: ResultsCube, statistic=Statistic.MEAN,
                    metric=ErrorMetricKind.MSE) -> ResultsCube:
    """Collapse the seed dimension of one metric; result records carry ``seed=None``."""
    statistic = Statistic.parse(statistic)
    metric = ErrorMetricKind(metric)
    groups: dict[tuple, list[float]] = defaultdict(list)
    for r in cube.records:
        if r.metric == metric:
            groups[(r.model, r.dataset, r.horizon)].append(r.value)
    if not groups:
        raise MetricAbsent(f"no {metric.value} records in cube")
    out = []
    for (model, dataset, horizon), vals in groups.items():
        v = math.fsum(vals) / len(vals) if statistic is Statistic.MEAN else min(vals)
        out.append(ResultRecord(model, dataset, horizon, None, metric, v))
    return ResultsCube(tuple(out))


@dataclass(frozen=True)
class AggregatedTable:
    """Dense (model, dataset) -> error table for one metric."""

    metric: ErrorMetricKind
    statistic: Statistic
    values: Mapping[tuple[str, str], float]
    horizons_used: tuple[int, ...]
    models: tuple[str, ...]
    datasets: tuple[str, ...]

    def __post_init__(self):
        missing = [(m, d) for d in self.datasets for m in self.models if (m, d) not in self.values]
        if missing:
            m, d = missing[0]
            raise IncompleteTable(f"missing ({m},{d}) in aggregated table "
                                  f"({len(missing)} cells missing)")

    def __getitem__(self, key):
        return self.values[key]

    def matrix(self) -> np.ndarray:
        """Values as a ``len(datasets) x len(models)`` array."""
        return np.array([[self.values[(m, d)] for m in self.models] for d in self.datasets],
                        dtype=float)

    def column(self, model) -> np.ndarray:
        return np.array([self.values[(model, d)] for d in self.datasets], dtype=float)

    def model_means(self) -> dict[str, float]:
        """Per-model mean over datasets (the "Average" row of a results table)."""
        return {m: math.fsum(self.values[(m, d)] for d in self.datasets) / len(self.datasets)
                for m in self.models}

    def subset(self, models=None, datasets=None, exclude_models=(), exclude_datasets=()):
        models = [m for m in (models or self.models) if m not in exclude_models]
        datasets = [d for d in (datasets or self.datasets) if d not in exclude_datasets]
        for m in models:
            if m not in self.models:
                raise ValidationError(f"unknown model {m!r}")
        for d in datasets:
            if d not in self.datasets:
                raise ValidationError(f"unknown dataset {d!r}")
        vals = {(m, d): self.values[(m, d)] for m in models for d in datasets}
        return AggregatedTable(self.metric, self.statistic, vals, self.horizons_used,
                               tuple(models), tuple(datasets))

    def merge(self, other: "AggregatedTable") -> "AggregatedTable":
        if other.metric != self.metric:
            raise ValidationError("cannot merge tables of different metrics")
        vals = dict(self.values)
        vals.update(other.values)
        return AggregatedTable(self.metric, self.statistic, vals, self.horizons_used,
                               _first_seen(self.models + other.models),
                               _first_seen(self.datasets + other.datasets))


def average_over_horizons(cube: ResultsCube, horizons: Sequence[int] | None = None,
                          metric=ErrorMetricKind.MSE,
                          statistic=Statistic.MEAN) -> AggregatedTable:
    """Per (model, dataset) arithmetic mean over ``horizons`` (default: all in the cube).

    Seeds are collapsed first with ``statistic``.
    """
    metric = ErrorMetricKind(metric)
    statistic = Statistic.parse(statistic)
    flat = aggregate_seeds(cube, statistic, metric)
    horizons = tuple(horizons) if horizons is not None else flat.horizons
    if not horizons:
        raise ValidationError("empty horizon subset")
    values = {}
    for d in flat.datasets:
        for m in flat.models:
            cells = []
            for h in horizons:
                v = flat.get(m, d, h, metric, seed=None)
                if v is None:
                    raise MissingCell(f"missing cell (model={m}, dataset={d}, horizon={h})")
                cells.append(v)
            values[(m, d)] = math.fsum(cells) / len(cells)
    return AggregatedTable(metric, statistic, values, horizons, flat.models, flat.datasets)


def ingest_table(path, metric=None, delimiter=",") -> AggregatedTable:
    """Load a pre-aggregated ``model,dataset,metric,value`` table.

    Extra columns (e.g. the ``tag`` column of a delimited export) are ignored.
    """
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh, delimiter=delimiter)
        header = [h.strip() for h in next(reader, [])]
        for name in ("model", "dataset", "metric", "value"):
            if name not in header:
                raise MissingColumn(f"{path}: missing required column {name!r}")
        ix = {n: header.index(n) for n in ("model", "dataset", "metric", "value")}
        rows = [(i, r) for i, r in enumerate(reader, start=2) if any(c.strip() for c in r)]
    if not rows:
        raise EmptyCube(f"{path}: no data rows")
    tables: dict[ErrorMetricKind, dict] = defaultdict(dict)
    for rowno, row in rows:
        met = ErrorMetricKind.parse(row[ix["metric"]])
        key = (row[ix["model"]].strip(), row[ix["dataset"]].strip())
        value = parse_real(row[ix["value"]], rowno)
        if value < 0:
            raise NegativeError(f"negative error value {value}", rowno)
        if key in tables[met]:
            raise ValidationError(f"duplicate cell {key}", rowno)
        tables[met][key] = value
    if metric is None:
        if len(tables) != 1:
            raise ValidationError(f"{path}: several metrics present, choose one")
        metric = next(iter(tables))
    metric = ErrorMetricKind(metric)
    if metric not in tables:
        raise MetricAbsent(f"{path}: no {metric.value} rows")
    vals = tables[metric]
    return AggregatedTable(metric, Statistic.MEAN, vals, (),
                           _first_seen(m for m, _ in vals), _first_seen(d for _, d in vals))


def rank_vector(values: Sequence[float]) -> np.ndarray:
    """Ascending ranks starting at 1; exactly equal values share their mean rank."""
    vals = np.asarray(values, dtype=float)
    order = np.argsort(vals, kind="stable")
    ranks = np.empty(len(vals))
    i = 0
    while i < len(vals):
        j = i
        while j + 1 < len(vals) and vals[order[j + 1]] == vals[order[i]]:
            j += 1
        ranks[order[i:j + 1]] = (i + j) / 2 + 1
        i = j + 1
    return ranks


def rank_rows(matrix) -> np.ndarray:
    """Rank each row of an ``N x k`` matrix independently."""
    mat = np.asarray(matrix, dtype=float)
    return np.vstack([rank_vector(row) for row in mat]) if len(mat) else np.empty((0, 0))


@dataclass(frozen=True)
class RankTable:
    ranks: Mapping[tuple[str, str], float]
    avg_rank: Mapping[str, float]
    models: tuple[str, ...]
    datasets: tuple[str, ...]


def rank_models(table: AggregatedTable) -> RankTable:
    mat = table.matrix()
    if not np.all(np.isfinite(mat)):
        raise IncompleteTable("aggregated table contains non-finite cells")
    r = rank_rows(mat)
    ranks = {(m, d): float(r[i, j]) for i, d in enumerate(table.datasets)
             for j, m in enumerate(table.models)}
    avg = {m: math.fsum(r[:, j]) / len(table.datasets) for j, m in enumerate(table.models)}
    return RankTable(ranks, avg, table.models, table.datasets)


@dataclass(frozen=True)
class WinRateReport:
    per_model: Mapping[str, float]
    cells_counted: int
    wins: Mapping[str, float]


def split_wins(scores: np.ndarray) -> np.ndarray:
    """One win shared equally among the exact minimizers of ``scores``."""
    best = scores == scores.min()
    return best / best.sum()


def win_rate(cube: ResultsCube, metric=ErrorMetricKind.MSE,
             granularity=Granularity.PER_HORIZON, statistic=Statistic.MEAN) -> WinRateReport:
    metric = ErrorMetricKind(metric)
    granularity = Granularity(granularity)
    if granularity is Granularity.PER_DATASET:
        mat = average_over_horizons(cube, None, metric, statistic).matrix()
        models = aggregate_seeds(cube, statistic, metric).models
    else:
        flat = aggregate_seeds(cube, statistic, metric)
        models = flat.models
        rows = []
        for d in flat.datasets:
            for h in flat.horizons:
                row = [flat.get(m, d, h, metric, seed=None) for m in models]
                if any(v is None for v in row):
                    m = models[[v is None for v in row].index(True)]
                    raise IncompleteTable(f"missing cell (model={m}, dataset={d}, horizon={h})")
                rows.append(row)
        mat = np.array(rows, dtype=float)
    wins = np.zeros(len(models))
    for row in mat:
        wins += split_wins(row)
    n = len(mat)
    return WinRateReport({m: 100.0 * wins[j] / n for j, m in enumerate(models)}, n,
                         {m: float(wins[j]) for j, m in enumerate(models)})
