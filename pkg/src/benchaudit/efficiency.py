"""Efficiency-weighted error score relative to a baseline model.

    xi(m) = (err(b) / err(m)) * prod_k (phi_k(b) / phi_k(m)) ** (s_k * w)

with ``s_k = +1`` for lower-is-better efficiency measures and ``-1`` for
higher-is-better ones.  The baseline scores exactly 1; values above 1 mean
the model beats the baseline after paying for its extra cost.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable, Mapping, Sequence

from .aggregate import AggregatedTable
from .errors import MissingEfficiencyKind, MissingModel, NonPositiveInput, ValidationError
from .results import Direction, EfficiencyKind, EfficiencyTable, ErrorMetricKind

DEFAULT_WEIGHT = 0.07


def direction_sign(direction: Direction) -> int:
    return 1 if Direction(direction) is Direction.LOWER_BETTER else -1


def xi(model_error: float, baseline_error: float,
       phi_ratios: Iterable[tuple[float, float, Direction]], w: float = DEFAULT_WEIGHT) -> float:
    """Efficiency-weighted score of one model.

    ``phi_ratios`` holds ``(baseline_value, model_value, direction)`` triples.
    """
    if not (model_error > 0 and baseline_error > 0):
        raise NonPositiveInput(f"errors must be > 0 (model={model_error}, "
                               f"baseline={baseline_error})")
    if not math.isfinite(w) or w < 0:
        raise ValidationError(f"weight must be finite and >= 0, got {w}")
    score = baseline_error / model_error
    for base_val, model_val, direction in phi_ratios:
        if not (base_val > 0 and model_val > 0):
            raise NonPositiveInput(f"efficiency values must be > 0 ({base_val}, {model_val})")
        score *= (base_val / model_val) ** (direction_sign(direction) * w)
    return score


@dataclass(frozen=True)
class XiSpec:
    baseline: str
    phi_set: tuple[EfficiencyKind, ...]
    weight: float = DEFAULT_WEIGHT
    error_metric: ErrorMetricKind = ErrorMetricKind.MSE

    def __post_init__(self):
        if not self.phi_set:
            raise ValidationError("phi_set must name at least one efficiency kind")
        if not math.isfinite(self.weight) or self.weight < 0:
            raise ValidationError(f"weight must be finite and >= 0, got {self.weight}")


@dataclass(frozen=True)
class XiReport:
    per_model: Mapping[str, float]
    spec: XiSpec
    model_errors: Mapping[str, float]
    datasets: tuple[str, ...]
    baseline_auto: bool = False


def auto_baseline(efficiency: EfficiencyTable, kinds: Sequence[EfficiencyKind],
                  models: Sequence[str]) -> str:
    """The model that is at least as efficient as every other on every kind."""
    for cand in models:
        ok = True
        for kind in kinds:
            cv = efficiency.value(cand, kind)
            if cv is None:
                ok = False
                break
            for other in models:
                ov = efficiency.value(other, kind)
                if ov is None:
                    continue
                if (kind.direction is Direction.LOWER_BETTER and ov < cv) or \
                        (kind.direction is Direction.HIGHER_BETTER and ov > cv):
                    ok = False
                    break
            if not ok:
                break
        if ok:
            return cand
    raise ValidationError("no model dominates all others on the requested efficiency kinds; "
                          "pass a baseline explicitly")


def xi_leaderboard(results: AggregatedTable, efficiency: EfficiencyTable, spec: XiSpec,
                   dataset_filter: Iterable[str] = ()) -> XiReport:
    """Score every model of ``results`` against ``spec.baseline``.

    The error of a model is its mean over the included datasets of the
    horizon-averaged errors; each efficiency value is the average of the
    model's records for that kind.
    """
    excluded = set(dataset_filter)
    datasets = tuple(d for d in results.datasets if d not in excluded)
    if not datasets:
        raise ValidationError("dataset filter removed every dataset")
    table = results.subset(datasets=datasets)
    errors = table.model_means()
    if spec.baseline not in errors:
        raise MissingModel(f"baseline {spec.baseline!r} has no results")

    phi = {}
    for m in table.models:
        for kind in spec.phi_set:
            v = efficiency.value(m, kind)
            if v is None:
                if m not in efficiency.models:
                    raise MissingModel(f"model {m!r} has no efficiency records")
                raise MissingEfficiencyKind(f"model {m!r} lacks efficiency kind {kind.value}")
            phi[(m, kind)] = v

    b = spec.baseline
    scores = {}
    for m in table.models:
        if m == b:
            scores[m] = 1.0
            continue
        triples = [(phi[(b, k)], phi[(m, k)], k.direction) for k in spec.phi_set]
        scores[m] = xi(errors[m], errors[b], triples, spec.weight)
    return XiReport(scores, spec, errors, datasets)
