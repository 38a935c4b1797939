"""Friedman test over nine models and the iPatch vs iTransformer sign test."""

from pathlib import Path

from benchaudit.aggregate import average_over_horizons, ingest_table
from benchaudit.results import ingest_many
from benchaudit.stattests import friedman_table, sign_test_table

DATA = Path(__file__).resolve().parents[1] / "data"
MODELS = ("DLinear", "PatchTST", "iTransformer", "TimeMixer", "TimeXer", "iPatch",
          "S-Mamba", "xLSTMTime", "ModernTCN")


def main():
    printed = ingest_table(DATA / "full_results_mean_avg.csv", "MAE").merge(
        ingest_table(DATA / "ipatch_mean_avg.csv", "MAE")).subset(models=MODELS)
    cube = ingest_many([DATA / "full_results_mean.csv", DATA / "ipatch_mean.csv"])
    computed = average_over_horizons(cube, metric="MAE").subset(models=MODELS)
    for label, table in (("printed averages", printed), ("recomputed averages", computed)):
        fr = friedman_table(table)
        print(f"Friedman ({label}): chi2_F = {fr.chi2:.3f}, dof = {fr.dof}, p = {fr.p_value:.4f}")
        for m, r in fr.avg_ranks.items():
            print(f"    {m:14s} {r:.2f}")
        for w in fr.warnings:
            print(f"    note: {w}")
        for metric_table in (table,):
            st = sign_test_table(metric_table, "iPatch", "iTransformer")
            print(f"  sign test iPatch vs iTransformer: {st.wins_a}-{st.wins_b} "
                  f"(ties {st.ties_raw}, n = {st.n_effective}), two-sided p = "
                  f"{st.p_two_sided:.5f}, one-sided p = {st.p_one_sided_exact}")


if __name__ == "__main__":
    main()
