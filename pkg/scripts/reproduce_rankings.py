"""Horizon-averaged errors, average ranks and win rates from the per-horizon results."""

from pathlib import Path

from benchaudit.aggregate import Granularity, average_over_horizons, rank_models, win_rate
from benchaudit.report import render_table
from benchaudit.results import ingest_results

DATA = Path(__file__).resolve().parents[1] / "data"
MODELS = ("DLinear", "PatchTST", "iTransformer", "TimeMixer", "TimeXer",
          "S-Mamba", "xLSTMTime", "ModernTCN")


def main():
    cube = ingest_results(DATA / "full_results_mean.csv")
    for metric in ("MSE", "MAE"):
        table = average_over_horizons(cube, metric=metric).subset(models=MODELS)
        print(f"\n# {metric}, mean over seeds, averaged over horizons\n")
        print(render_table(table))
    wr = win_rate(cube.filter(models=MODELS), "MSE", Granularity.PER_HORIZON)
    print(f"win rate per (dataset, horizon) cell, {wr.cells_counted} cells:")
    for m, pct in sorted(wr.per_model.items(), key=lambda kv: -kv[1]):
        print(f"  {m:14s} {pct:6.2f}%")
    full = average_over_horizons(cube, metric="MSE")
    print("\nwith ARIMA and LOCF, average rank:")
    for m, r in sorted(rank_models(full).avg_rank.items(), key=lambda kv: kv[1]):
        print(f"  {m:14s} {r:5.2f}")


if __name__ == "__main__":
    main()
