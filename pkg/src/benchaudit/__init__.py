"""Auditing toolkit for forecasting benchmark results.

Aggregation and ranking, nonparametric tests, subset-sampling robustness,
efficiency-weighted scores, dataset characterization features and radar
figures, all driven from plain delimited result files.
"""

__version__ = "0.1.0"

from .aggregate import (  # noqa: E402
    AggregatedTable,
    Statistic,
    average_over_horizons,
    ingest_table,
    rank_models,
    win_rate,
)
from .efficiency import XiSpec, xi, xi_leaderboard  # noqa: E402
from .results import (  # noqa: E402
    EfficiencyKind,
    ErrorMetricKind,
    ResultsCube,
    ingest_efficiency,
    ingest_results,
)
from .robustness import RobustnessConfig, run_robustness  # noqa: E402
from .stattests import chi2_sf, friedman, sign_test  # noqa: E402

__all__ = [
    "AggregatedTable", "Statistic", "average_over_horizons", "ingest_table", "rank_models",
    "win_rate", "XiSpec", "xi", "xi_leaderboard", "EfficiencyKind", "ErrorMetricKind",
    "ResultsCube", "ingest_efficiency", "ingest_results", "RobustnessConfig",
    "run_robustness", "chi2_sf", "friedman", "sign_test",
]
