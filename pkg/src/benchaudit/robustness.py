"""Ranking robustness under random dataset/horizon subsets.

Each of ``k_samples`` experimental configurations draws a dataset subset and
a horizon subset with the two-stage law (size uniform on ``1..M``, then a
uniform subset of that size), scores every model by the unweighted mean of
its selected cells and awards the win to the lowest score.

Configurations are generated in fixed blocks of 1024; block ``b`` draws from
its own PCG64 stream seeded by ``SeedSequence(master_seed, spawn_key=(b,))``,
so results do not depend on the number of workers or the order in which
blocks are evaluated.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Mapping, Sequence

import numpy as np

from .aggregate import Statistic, aggregate_seeds
from .errors import MissingCell, ValidationError
from .results import ErrorMetricKind, ResultsCube

_SEED_MASK = (1 << 64) - 1


class IncompleteCube(MissingCell):
    pass


@dataclass(frozen=True)
class RobustnessConfig:
    k_samples: int = 5000
    master_seed: int = 0
    dataset_pool: tuple[str, ...] | None = None
    horizon_pool: tuple[int, ...] | None = None
    metric: ErrorMetricKind = ErrorMetricKind.MSE
    models: tuple[str, ...] | None = None
    statistic: Statistic = Statistic.MEAN

    def __post_init__(self):
        if self.k_samples < 1:
            raise ValidationError("k_samples must be >= 1")
        if self.dataset_pool is not None and not self.dataset_pool:
            raise ValidationError("dataset pool is empty")
        if self.horizon_pool is not None and not self.horizon_pool:
            raise ValidationError("horizon pool is empty")
        if self.models is not None and not self.models:
            raise ValidationError("model list is empty")


@dataclass(frozen=True)
class ModelRobustness:
    win_pct: float
    mean_error: float
    std_error: float


@dataclass(frozen=True)
class RobustnessReport:
    per_model: Mapping[str, ModelRobustness]
    k_samples: int
    master_seed: int
    models: tuple[str, ...] = field(default=())
    datasets: tuple[str, ...] = field(default=())
    horizons: tuple[int, ...] = field(default=())

    def ranking(self) -> list[str]:
        """Models ordered by descending win percentage."""
        return sorted(self.per_model, key=lambda m: -self.per_model[m].win_pct)


BLOCK = 1024


def block_rng(master_seed: int, block: int) -> np.random.Generator:
    ss = np.random.SeedSequence(master_seed & _SEED_MASK, spawn_key=(block,))
    return np.random.Generator(np.random.PCG64(ss))


def _subset_masks(rng: np.random.Generator, n: int, size: int) -> np.ndarray:
    # size ~ U{1..size}, then a uniform subset of that size: the k smallest of
    # iid uniforms index a uniformly random k-subset
    k = rng.integers(1, size + 1, size=n)
    order = rng.random((n, size)).argsort(axis=1).argsort(axis=1)
    return order < k[:, None]


def sample_block(rng: np.random.Generator, M: int, H: int, n: int = BLOCK):
    """Boolean ``(n, M)`` dataset masks and ``(n, H)`` horizon masks.

    Always draws a full :data:`BLOCK` and truncates, so a configuration's
    subsets do not depend on how many configurations are requested.
    """
    if M < 1 or H < 1:
        raise ValidationError("M and H must be >= 1")
    ds = _subset_masks(rng, BLOCK, M)
    hs = _subset_masks(rng, BLOCK, H)
    return ds[:n], hs[:n]


def sample_configurations(k_samples: int, master_seed: int, M: int, H: int):
    """All ``k_samples`` configurations as stacked masks (for inspection and tests)."""
    parts = [sample_block(block_rng(master_seed, b), M, H, min(BLOCK, k_samples - b * BLOCK))
             for b in range(math.ceil(k_samples / BLOCK))]
    return np.vstack([p[0] for p in parts]), np.vstack([p[1] for p in parts])


def build_cube_array(cube: ResultsCube, cfg: RobustnessConfig):
    """Seed-aggregated ``models x datasets x horizons`` array for the configured pools."""
    flat = aggregate_seeds(cube, cfg.statistic, cfg.metric)
    models = tuple(cfg.models) if cfg.models is not None else flat.models
    datasets = tuple(cfg.dataset_pool) if cfg.dataset_pool is not None else flat.datasets
    horizons = tuple(cfg.horizon_pool) if cfg.horizon_pool is not None else flat.horizons
    arr = np.empty((len(models), len(datasets), len(horizons)))
    for i, m in enumerate(models):
        for j, d in enumerate(datasets):
            for k, h in enumerate(horizons):
                v = flat.get(m, d, h, cfg.metric, seed=None)
                if v is None:
                    raise IncompleteCube(f"missing cell (model={m}, dataset={d}, horizon={h})")
                arr[i, j, k] = v
    return arr, models, datasets, horizons


def score_masks(arr: np.ndarray, ds: np.ndarray, hs: np.ndarray) -> np.ndarray:
    """Unweighted mean of each model's selected cells, one row per configuration."""
    sel = ds[:, None, :, None] & hs[:, None, None, :]
    total = np.where(sel, arr[None], 0.0).sum(axis=(2, 3))
    return total / (ds.sum(axis=1) * hs.sum(axis=1))[:, None]


def _score_block(arr: np.ndarray, master_seed: int, block: int, k_samples: int) -> np.ndarray:
    _, M, H = arr.shape
    n = min(BLOCK, k_samples - block * BLOCK)
    ds, hs = sample_block(block_rng(master_seed, block), M, H, n)
    return score_masks(arr, ds, hs)


def configuration_scores(arr: np.ndarray, k_samples: int, master_seed: int,
                         workers: int = 1) -> np.ndarray:
    """``k_samples x n_models`` matrix of per-configuration mean errors.

    Blocks of :data:`BLOCK` configurations are the unit of parallel work;
    results are stacked in block order.
    """
    blocks = range(math.ceil(k_samples / BLOCK))
    workers = max(1, int(workers))
    if workers == 1:
        parts = [_score_block(arr, master_seed, b, k_samples) for b in blocks]
    else:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            parts = list(pool.map(lambda b: _score_block(arr, master_seed, b, k_samples),
                                  blocks))
    return np.vstack(parts)


def run_robustness(cube: ResultsCube, cfg: RobustnessConfig, workers: int = 1) -> RobustnessReport:
    arr, models, datasets, horizons = build_cube_array(cube, cfg)
    scores = configuration_scores(arr, cfg.k_samples, cfg.master_seed, workers)
    best = scores == scores.min(axis=1, keepdims=True)
    wins = (best / best.sum(axis=1, keepdims=True)).sum(axis=0)
    per_model = {}
    for j, m in enumerate(models):
        col = scores[:, j]
        mean = math.fsum(col) / len(col)
        std = math.sqrt(math.fsum((col - mean) ** 2) / len(col))
        per_model[m] = ModelRobustness(100.0 * float(wins[j]) / cfg.k_samples, mean, std)
    return RobustnessReport(per_model, cfg.k_samples, cfg.master_seed,
                            models, datasets, horizons)
