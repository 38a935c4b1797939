"""Write absolute- and relative-scale radar figures of the horizon-averaged MSE."""

import argparse
from pathlib import Path

from benchaudit.aggregate import ingest_table
from benchaudit.report import RadarMode, build_radar, emit_svg

DATA = Path(__file__).resolve().parents[1] / "data"
MODELS = ("DLinear", "PatchTST", "iTransformer", "TimeMixer", "TimeXer",
          "S-Mamba", "xLSTMTime", "ModernTCN")


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--out", default="radar_out")
    args = ap.parse_args()
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    table = ingest_table(DATA / "full_results_mean_avg.csv", "MSE").subset(models=MODELS)
    for mode in RadarMode:
        path = emit_svg(build_radar(table, mode), out / f"radar_{mode.value.lower()}.svg",
                        title=f"MSE, {mode.value.lower()} scale")
        print(path)


if __name__ == "__main__":
    main()
