"""Win percentages under random dataset/horizon subsets, with and without MotorImagery."""

import argparse
from pathlib import Path

from benchaudit.aggregate import Statistic
from benchaudit.results import ingest_results
from benchaudit.robustness import RobustnessConfig, run_robustness

DATA = Path(__file__).resolve().parents[1] / "data"
MODELS = ("DLinear", "PatchTST", "iTransformer", "TimeMixer", "TimeXer",
          "S-Mamba", "xLSTMTime", "ModernTCN")


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--samples", type=int, default=5000)
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--stat", choices=["mean", "min"], default="mean")
    ap.add_argument("--workers", type=int, default=1)
    args = ap.parse_args()

    source = "full_results_mean.csv" if args.stat == "mean" else "full_results_min.csv"
    cube = ingest_results(DATA / source).filter(models=MODELS)
    cfg = RobustnessConfig(k_samples=args.samples, master_seed=args.seed,
                           statistic=Statistic.parse(args.stat))
    for label, sub in (("all datasets", cube),
                       ("without MotorImagery", cube.filter(exclude_datasets=("MotorImagery",)))):
        rep = run_robustness(sub, cfg, workers=args.workers)
        print(f"\n{label} (K = {rep.k_samples}, seed = {rep.master_seed})")
        for m in rep.ranking():
            r = rep.per_model[m]
            print(f"  {m:14s} {r.win_pct:6.2f}%   MSE {r.mean_error:.3f} +/- {r.std_error:.3f}")


if __name__ == "__main__":
    main()
