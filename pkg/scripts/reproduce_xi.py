"""Efficiency-weighted scores relative to DLinear for each efficiency set."""

from pathlib import Path

from benchaudit.aggregate import ingest_table
from benchaudit.efficiency import XiSpec, xi_leaderboard
from benchaudit.results import EfficiencyKind as K
from benchaudit.results import ingest_efficiency

DATA = Path(__file__).resolve().parents[1] / "data"
MODELS = ("DLinear", "PatchTST", "iTransformer", "TimeMixer", "TimeXer",
          "S-Mamba", "xLSTMTime", "ModernTCN")
PHI_SETS = {
    "FLOPs": (K.FLOPS,),
    "#params": (K.PARAMS,),
    "TP+memory (train)": (K.TRAIN_THROUGHPUT, K.TRAIN_MEMORY),
    "TP+memory (test)": (K.TEST_THROUGHPUT, K.TEST_MEMORY),
}


def main():
    table = ingest_table(DATA / "full_results_mean_avg.csv", "MSE").subset(models=MODELS)
    eff = ingest_efficiency(DATA / "efficiency.csv")
    print(f"{'':20s}" + "".join(f"{m:>16s}" for m in MODELS))
    for name, phi in PHI_SETS.items():
        a = xi_leaderboard(table, eff, XiSpec("DLinear", phi)).per_model
        b = xi_leaderboard(table, eff, XiSpec("DLinear", phi), ["MotorImagery"]).per_model
        print(f"{name:20s}" + "".join(f"{a[m]:>9.2f} /{b[m]:>5.2f}" for m in MODELS))
    print("\n(A / B: all datasets / without MotorImagery)")


if __name__ == "__main__":
    main()
