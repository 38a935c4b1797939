"""Canonical data model for benchmark results and efficiency measurements.

A :class:`ResultsCube` is a sparse map ``(model, dataset, horizon, seed,
metric) -> error``.  Everything downstream (ranking, significance tests,
subset resampling, the efficiency-weighted score) starts from one.
"""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass, field
from enum import Enum
from pathlib import Path
from typing import Iterable, Mapping

from .errors import (
    DuplicateKey,
    EmptyCube,
    MissingColumn,
    NegativeError,
    NonNumericValue,
    NonPositiveValue,
    UnknownEfficiencyKind,
    ValidationError,
)

RESULT_COLUMNS = ("model", "dataset", "horizon", "seed", "metric", "value")
EFFICIENCY_COLUMNS = ("model", "kind", "value", "dataset", "horizon")


class ErrorMetricKind(str, Enum):
    MSE = "MSE"
    MAE = "MAE"

    @classmethod
    def parse(cls, text: str) -> "ErrorMetricKind":
        try:
            return cls(text.strip().upper())
        except ValueError:
            raise ValidationError(f"unknown error metric {text!r}") from None

    def __str__(self) -> str:
        return self.value


class Direction(str, Enum):
    LOWER_BETTER = "LOWER_BETTER"
    HIGHER_BETTER = "HIGHER_BETTER"


class EfficiencyKind(str, Enum):
    FLOPS = "FLOPS"
    PARAMS = "PARAMS"
    TRAIN_THROUGHPUT = "TRAIN_THROUGHPUT"
    TRAIN_MEMORY = "TRAIN_MEMORY"
    TEST_THROUGHPUT = "TEST_THROUGHPUT"
    TEST_MEMORY = "TEST_MEMORY"

    @property
    def direction(self) -> Direction:
        if self in (EfficiencyKind.TRAIN_THROUGHPUT, EfficiencyKind.TEST_THROUGHPUT):
            return Direction.HIGHER_BETTER
        return Direction.LOWER_BETTER

    @classmethod
    def parse(cls, text: str) -> "EfficiencyKind":
        key = text.strip().upper()
        try:
            return cls(key)
        except ValueError:
            raise UnknownEfficiencyKind(f"unknown efficiency kind {text!r}") from None

    def __str__(self) -> str:
        return self.value


def parse_real(token: str, row: int | None = None, column: str = "value") -> float:
    """Parse a dot-decimal real, rejecting NaN/Inf spellings explicitly."""
    text = token.strip()
    if text.lower().lstrip("+-") in ("nan", "inf", "infinity"):
        raise NonNumericValue(f"non-finite {column} {token!r}", row)
    try:
        value = float(text)
    except ValueError:
        raise NonNumericValue(f"non-numeric {column} {token!r}", row) from None
    if not math.isfinite(value):
        raise NonNumericValue(f"non-finite {column} {token!r}", row)
    return value


def _parse_int(token: str, row: int, column: str) -> int:
    try:
        return int(token.strip())
    except ValueError:
        raise NonNumericValue(f"non-integer {column} {token!r}", row) from None


@dataclass(frozen=True)
class ResultRecord:
    model: str
    dataset: str
    horizon: int
    seed: int | None
    metric: ErrorMetricKind
    value: float

    def __post_init__(self):
        if not (isinstance(self.value, (int, float)) and math.isfinite(self.value)):
            raise NonNumericValue(f"non-finite value {self.value!r}")
        if self.value < 0:
            raise NegativeError(f"negative error value {self.value}")
        if self.horizon <= 0:
            raise ValidationError(f"horizon must be positive, got {self.horizon}")
        if self.seed is not None and self.seed < 0:
            raise ValidationError(f"seed must be non-negative, got {self.seed}")

    @property
    def key(self) -> tuple:
        return (self.model, self.dataset, self.horizon, self.seed, self.metric)


def _first_seen(values: Iterable) -> tuple:
    return tuple(dict.fromkeys(values))


@dataclass(frozen=True)
class ResultsCube:
    """Immutable collection of result records with first-seen index lists."""

    records: tuple[ResultRecord, ...]
    models: tuple[str, ...] = field(init=False)
    datasets: tuple[str, ...] = field(init=False)
    horizons: tuple[int, ...] = field(init=False)
    _index: dict = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        records = tuple(self.records)
        index = {}
        for i, rec in enumerate(records):
            if rec.key in index:
                raise DuplicateKey(f"duplicate key {rec.key!r}")
            index[rec.key] = rec.value
        object.__setattr__(self, "records", records)
        object.__setattr__(self, "_index", index)
        object.__setattr__(self, "models", _first_seen(r.model for r in records))
        object.__setattr__(self, "datasets", _first_seen(r.dataset for r in records))
        object.__setattr__(self, "horizons", _first_seen(r.horizon for r in records))

    def __len__(self) -> int:
        return len(self.records)

    @property
    def metrics(self) -> tuple[ErrorMetricKind, ...]:
        return _first_seen(r.metric for r in self.records)

    def seeds(self, model, dataset, horizon, metric) -> list[int | None]:
        return [r.seed for r in self.records
                if (r.model, r.dataset, r.horizon, r.metric) == (model, dataset, horizon, metric)]

    def get(self, model, dataset, horizon, metric, seed=0) -> float | None:
        return self._index.get((model, dataset, horizon, seed, ErrorMetricKind(metric)))

    def filter(self, *, metric=None, models=None, datasets=None, horizons=None,
               exclude_models=(), exclude_datasets=(), exclude_horizons=()) -> "ResultsCube":
        """Sub-cube keeping records that pass every given filter."""
        keep = []
        for r in self.records:
            if metric is not None and r.metric != metric:
                continue
            if models is not None and r.model not in models:
                continue
            if datasets is not None and r.dataset not in datasets:
                continue
            if horizons is not None and r.horizon not in horizons:
                continue
            if r.model in exclude_models or r.dataset in exclude_datasets \
                    or r.horizon in exclude_horizons:
                continue
            keep.append(r)
        return ResultsCube(tuple(keep))

    def merge(self, other: "ResultsCube") -> "ResultsCube":
        return ResultsCube(self.records + other.records)


def _read_rows(path, delimiter):
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh, delimiter=delimiter)
        try:
            header = [h.strip() for h in next(reader)]
        except StopIteration:
            raise MissingColumn(f"{path}: no header row") from None
        # row numbers are 1-based file lines; the header is row 1
        rows = [(i, row) for i, row in enumerate(reader, start=2) if any(c.strip() for c in row)]
    return header, rows


def ingest_results(path, schema: Mapping[str, str] | None = None,
                   delimiter: str = ",") -> ResultsCube:
    """Load a results file (``model,dataset,horizon[,seed],metric,value``).

    ``schema`` maps canonical column names to the names used in the file.
    A missing seed column means every record is a single run with seed 0.
    """
    schema = dict(schema or {})
    header, rows = _read_rows(path, delimiter)
    col = {}
    for name in RESULT_COLUMNS:
        src = schema.get(name, name)
        if src in header:
            col[name] = header.index(src)
        elif name != "seed":
            raise MissingColumn(f"{path}: missing required column {src!r}")
    if not rows:
        raise EmptyCube(f"{path}: no data rows")

    records = []
    seen = {}
    for rowno, row in rows:
        if len(row) < len(header):
            raise ValidationError(f"expected {len(header)} fields, got {len(row)}", rowno)
        model = row[col["model"]].strip()
        dataset = row[col["dataset"]].strip()
        if not model or not dataset:
            raise ValidationError("empty model or dataset identifier", rowno)
        horizon = _parse_int(row[col["horizon"]], rowno, "horizon")
        if horizon <= 0:
            raise ValidationError(f"horizon must be positive, got {horizon}", rowno)
        seed = 0
        if "seed" in col and row[col["seed"]].strip():
            seed = _parse_int(row[col["seed"]], rowno, "seed")
            if seed < 0:
                raise ValidationError(f"seed must be non-negative, got {seed}", rowno)
        try:
            metric = ErrorMetricKind.parse(row[col["metric"]])
        except ValidationError as exc:
            raise ValidationError(str(exc), rowno) from None
        value = parse_real(row[col["value"]], rowno)
        if value < 0:
            raise NegativeError(f"negative error value {value}", rowno)
        rec = ResultRecord(model, dataset, horizon, seed, metric, value)
        if rec.key in seen:
            raise DuplicateKey(f"duplicate of row {seen[rec.key]} for key "
                               f"({model},{dataset},{horizon},{seed},{metric})", rowno)
        seen[rec.key] = rowno
        records.append(rec)
    return ResultsCube(tuple(records))


def ingest_many(paths, schema=None, delimiter=",") -> ResultsCube:
    cube = None
    for p in paths:
        part = ingest_results(p, schema, delimiter)
        cube = part if cube is None else cube.merge(part)
    if cube is None:
        raise EmptyCube("no results files given")
    return cube


def format_results(cube: ResultsCube, delimiter: str = ",") -> str:
    buf = io.StringIO()
    w = csv.writer(buf, delimiter=delimiter, lineterminator="\n")
    w.writerow(RESULT_COLUMNS)
    for r in cube.records:
        w.writerow([r.model, r.dataset, r.horizon, "" if r.seed is None else r.seed,
                    r.metric.value, repr(float(r.value))])
    return buf.getvalue()


def write_results(cube: ResultsCube, path, delimiter: str = ",") -> None:
    Path(path).write_text(format_results(cube, delimiter), encoding="utf-8")


@dataclass(frozen=True)
class EfficiencyRecord:
    model: str
    kind: EfficiencyKind
    value: float
    dataset: str | None = None
    horizon: int | None = None

    def __post_init__(self):
        if not math.isfinite(self.value) or self.value <= 0:
            raise NonPositiveValue(f"efficiency value must be > 0, got {self.value}")

    @property
    def direction(self) -> Direction:
        return self.kind.direction


class EfficiencyTable:
    """Efficiency records with per-(model, kind) averaging over settings."""

    def __init__(self, records: Iterable[EfficiencyRecord]):
        self.records = tuple(records)
        self.models = _first_seen(r.model for r in self.records)

    def __len__(self):
        return len(self.records)

    def kinds(self, model) -> set[EfficiencyKind]:
        return {r.kind for r in self.records if r.model == model}

    def value(self, model, kind: EfficiencyKind) -> float | None:
        vals = [r.value for r in self.records if r.model == model and r.kind == kind]
        if not vals:
            return None
        return math.fsum(vals) / len(vals)


def ingest_efficiency(path, delimiter: str = ",") -> EfficiencyTable:
    header, rows = _read_rows(path, delimiter)
    for name in ("model", "kind", "value"):
        if name not in header:
            raise MissingColumn(f"{path}: missing required column {name!r}")
    if not rows:
        raise EmptyCube(f"{path}: no data rows")
    ix = {name: header.index(name) for name in EFFICIENCY_COLUMNS if name in header}
    records = []
    for rowno, row in rows:
        model = row[ix["model"]].strip()
        try:
            kind = EfficiencyKind.parse(row[ix["kind"]])
        except UnknownEfficiencyKind as exc:
            raise UnknownEfficiencyKind(str(exc), rowno) from None
        value = parse_real(row[ix["value"]], rowno)
        if value <= 0:
            raise NonPositiveValue(f"efficiency value must be > 0, got {value}", rowno)
        dataset = None
        if "dataset" in ix and row[ix["dataset"]].strip():
            dataset = row[ix["dataset"]].strip()
        horizon = None
        if "horizon" in ix and row[ix["horizon"]].strip():
            horizon = _parse_int(row[ix["horizon"]], rowno, "horizon")
        records.append(EfficiencyRecord(model, kind, value, dataset, horizon))
    return EfficiencyTable(records)


def format_efficiency(table: EfficiencyTable, delimiter: str = ",") -> str:
    buf = io.StringIO()
    w = csv.writer(buf, delimiter=delimiter, lineterminator="\n")
    w.writerow(EFFICIENCY_COLUMNS)
    for r in table.records:
        w.writerow([r.model, r.kind.value, repr(float(r.value)), r.dataset or "",
                    "" if r.horizon is None else r.horizon])
    return buf.getvalue()
