"""Table rendering, radar figures and JSON serialization of reports."""

from __future__ import annotations

import dataclasses
import json
import math
from enum import Enum
from fractions import Fraction
from pathlib import Path
from typing import Mapping, Sequence
from xml.sax.saxutils import escape

import numpy as np

from .aggregate import AggregatedTable, rank_models
from .errors import IncompleteTable, TooFewAxes, ValidationError


class RadarMode(str, Enum):
    ABSOLUTE = "ABSOLUTE"
    RELATIVE = "RELATIVE"


@dataclasses.dataclass(frozen=True)
class RadarSpec:
    axes: tuple[str, ...]
    per_model: Mapping[str, tuple[float, ...]]
    mode: RadarMode
    lower_is_better: bool = True
    value_range: tuple[float, float] = (0.0, 1.0)


def _relative(col: np.ndarray, lower_is_better: bool) -> np.ndarray:
    best, worst = (col.min(), col.max()) if lower_is_better else (col.max(), col.min())
    if best == worst:
        return np.ones_like(col)
    return (worst - col) / (worst - best)


def build_radar(table: AggregatedTable, mode=RadarMode.RELATIVE,
                lower_is_better: bool = True) -> RadarSpec:
    """Radar coordinates with one axis per dataset.

    RELATIVE maps each axis to [0, 1] with 1 at the best model; ABSOLUTE keeps
    raw values on the shared range [0, global max].
    """
    if not isinstance(mode, RadarMode):
        mode = RadarMode(str(mode).upper())
    mat = table.matrix()  # datasets x models
    if not np.all(np.isfinite(mat)):
        raise IncompleteTable("radar input contains non-finite cells")
    if mode is RadarMode.RELATIVE:
        mat = np.vstack([_relative(row, lower_is_better) for row in mat])
        rng = (0.0, 1.0)
    else:
        rng = (0.0, float(mat.max()))
    per_model = {m: tuple(float(v) for v in mat[:, j]) for j, m in enumerate(table.models)}
    return RadarSpec(tuple(table.datasets), per_model, mode, lower_is_better, rng)


_PALETTE = ("#1f77b4", "#ff7f0e", "#2ca02c", "#d62728", "#9467bd",
            "#8c564b", "#e377c2", "#7f7f7f", "#bcbd22", "#17becf")
_SIZE = 640
_RADIUS = 230.0


def _fmt(x: float) -> str:
    s = f"{x:.4f}"
    return "0.0000" if s == "-0.0000" else s


def svg_text(spec: RadarSpec, title: str | None = None) -> str:
    """Standalone SVG document for ``spec`` (one ``<polygon>`` per model)."""
    n = len(spec.axes)
    if n < 3:
        raise TooFewAxes(f"radar plot needs >= 3 axes, got {n}")
    cx = cy = _SIZE / 2
    lo, hi = spec.value_range
    span = (hi - lo) or 1.0
    angles = [-math.pi / 2 + 2 * math.pi * i / n for i in range(n)]

    def point(frac, ang):
        return cx + _RADIUS * frac * math.cos(ang), cy + _RADIUS * frac * math.sin(ang)

    out = ['<?xml version="1.0" encoding="UTF-8" standalone="yes"?>',
           f'<svg xmlns="http://www.w3.org/2000/svg" version="1.1" width="{_SIZE}" '
           f'height="{_SIZE + 40 + 18 * len(spec.per_model)}" font-family="sans-serif" '
           'font-size="11">']
    heading = title or f"{spec.mode.value.lower()} scale"
    out.append(f'<text x="{_fmt(cx)}" y="20.0000" text-anchor="middle" '
               f'font-size="14">{escape(heading)}</text>')
    for ring in (0.25, 0.5, 0.75, 1.0):
        out.append(f'<circle cx="{_fmt(cx)}" cy="{_fmt(cy)}" r="{_fmt(_RADIUS * ring)}" '
                   'fill="none" stroke="#cccccc"/>')
        label = lo + ring * span
        out.append(f'<text x="{_fmt(cx + 3)}" y="{_fmt(cy - _RADIUS * ring)}" '
                   f'fill="#888888">{_fmt(label)}</text>')
    for name, ang in zip(spec.axes, angles):
        x, y = point(1.0, ang)
        out.append(f'<line x1="{_fmt(cx)}" y1="{_fmt(cy)}" x2="{_fmt(x)}" y2="{_fmt(y)}" '
                   'stroke="#999999"/>')
        lx, ly = point(1.12, ang)
        out.append(f'<text x="{_fmt(lx)}" y="{_fmt(ly)}" text-anchor="middle">'
                   f'{escape(name)}</text>')
    for k, (model, vals) in enumerate(spec.per_model.items()):
        color = _PALETTE[k % len(_PALETTE)]
        pts = " ".join("{},{}".format(*map(_fmt, point((v - lo) / span, ang)))
                       for v, ang in zip(vals, angles))
        out.append(f'<polygon points="{pts}" fill="{color}" fill-opacity="0.08" '
                   f'stroke="{color}" stroke-width="1.5" data-model="{escape(model)}"/>')
        ly = _SIZE + 10 + 18 * k
        out.append(f'<rect x="20.0000" y="{_fmt(ly)}" width="12.0000" height="12.0000" '
                   f'fill="{color}"/>')
        out.append(f'<text x="38.0000" y="{_fmt(ly + 10)}">{escape(model)}</text>')
    out.append("</svg>")
    return "\n".join(out) + "\n"


def emit_svg(spec: RadarSpec, path, title: str | None = None) -> Path:
    path = Path(path)
    path.write_bytes(svg_text(spec, title).encode("utf-8"))
    return path


def tag_row(values: Sequence[float], lower_is_better: bool = True) -> list[str]:
    """``"best"``, ``"second"`` or ``""`` for each value.

    Every value equal to the optimum is best; a shared best leaves no second.
    """
    vals = np.asarray(values, dtype=float)
    if len(vals) == 0:
        return []
    key = vals if lower_is_better else -vals
    best = key.min()
    tags = ["best" if v == best else "" for v in key]
    if tags.count("best") == 1:
        rest = key[key != best]
        if len(rest):
            second = rest.min()
            tags = [t or ("second" if v == second else "") for t, v in zip(tags, key)]
    return tags


def _md_cell(v: float, tag: str, digits: int) -> str:
    s = f"{v:.{digits}f}"
    return f"**{s}**" if tag == "best" else f"<u>{s}</u>" if tag == "second" else s


def render_table(table, fmt: str = "markdown", digits: int = 3, lower_is_better: bool = True,
                 average_row: bool = True, rank_row: bool = True, delimiter: str = ",") -> str:
    """Render an :class:`AggregatedTable` (rows: datasets, columns: models).

    Markdown bolds the best value per row and underlines the second best.
    The delimited form follows the aggregated ingestion schema with an extra
    ``tag`` column, so it can be read back with ``ingest_table``.
    """
    if not isinstance(table, AggregatedTable):
        raise ValidationError(f"cannot render {type(table).__name__} as a table")
    models = table.models
    if fmt == "delimited":
        lines = [delimiter.join(("model", "dataset", "metric", "value", "tag"))]
        for d in table.datasets:
            row = [table[(m, d)] for m in models]
            for m, v, t in zip(models, row, tag_row(row, lower_is_better)):
                lines.append(delimiter.join((m, d, table.metric.value, repr(float(v)), t)))
        return "\n".join(lines) + "\n"
    if fmt != "markdown":
        raise ValidationError(f"unknown table format {fmt!r}")

    lines = ["| Dataset | " + " | ".join(models) + " |",
             "|---|" + "---:|" * len(models)]
    for d in table.datasets:
        row = [table[(m, d)] for m in models]
        cells = [_md_cell(v, t, digits) for v, t in zip(row, tag_row(row, lower_is_better))]
        lines.append(f"| {d} | " + " | ".join(cells) + " |")
    if average_row:
        means = table.model_means()
        row = [means[m] for m in models]
        cells = [_md_cell(v, t, digits) for v, t in zip(row, tag_row(row, lower_is_better))]
        lines.append("| Average | " + " | ".join(cells) + " |")
    if rank_row and len(table.datasets) > 0:
        ranks = rank_models(table).avg_rank
        row = [ranks[m] for m in models]
        cells = [_md_cell(v, t, 2) for v, t in zip(row, tag_row(row, True))]
        lines.append("| Rank | " + " | ".join(cells) + " |")
    return "\n".join(lines) + "\n"


def to_jsonable(obj):
    """Recursively convert dataclasses, enums, fractions and numpy scalars for ``json``."""
    if dataclasses.is_dataclass(obj) and not isinstance(obj, type):
        return {f.name: to_jsonable(getattr(obj, f.name)) for f in dataclasses.fields(obj)}
    if isinstance(obj, Enum):
        return obj.value
    if isinstance(obj, Fraction):
        return f"{obj.numerator}/{obj.denominator}"
    if isinstance(obj, Mapping):
        return {(k if isinstance(k, str) else "|".join(map(str, k)) if isinstance(k, tuple)
                 else str(k)): to_jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [to_jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return [to_jsonable(v) for v in obj.tolist()]
    if isinstance(obj, np.generic):
        return obj.item()
    if isinstance(obj, float) and not math.isfinite(obj):
        return "inf" if obj > 0 else "-inf" if obj < 0 else "nan"
    return obj


def dump_json(obj) -> str:
    return json.dumps(to_jsonable(obj), indent=2, sort_keys=True) + "\n"


def kv_markdown(title: str, rows: Mapping[str, object], header=("key", "value")) -> str:
    """Two-column markdown table under a heading."""
    lines = [f"## {title}", "", f"| {header[0]} | {header[1]} |", "|---|---|"]
    for k, v in rows.items():
        if isinstance(v, float):
            v = f"{v:.4f}" if math.isfinite(v) else str(v)
        lines.append(f"| {k} | {v} |")
    return "\n".join(lines) + "\n"
