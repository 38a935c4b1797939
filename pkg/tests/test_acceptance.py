"""End-to-end acceptance checks, one test per criterion.

Each test records a one-line PASS/FAIL verdict (shown in the terminal
summary) before asserting, so a failing criterion is still reported.
"""

import json
import math
import time
from fractions import Fraction

import numpy as np
import pytest

import frozen
from benchaudit.aggregate import ingest_table
from benchaudit.cli import main
from benchaudit.efficiency import XiSpec, xi_leaderboard
from benchaudit.report import RadarMode, build_radar, emit_svg
from benchaudit.results import EfficiencyKind as K
from benchaudit.results import ErrorMetricKind, ResultRecord, ResultsCube
from benchaudit.robustness import RobustnessConfig, run_robustness
from benchaudit.seriesfeat import (
    adf_gamma,
    higuchi_fd,
    pca_ev1,
    sample_entropy,
    spectral_entropy,
)
from benchaudit.stattests import binomial_pmf, chi2_sf, friedman_table, sign_test
from conftest import DATA, FIXTURES, record_acceptance
from oracles import chi2_sf_quad, exact_win_probabilities, sampen_bruteforce


def _cli(tmp_path, *argv):
    out = tmp_path / "out"
    t0 = time.perf_counter()
    code = main([*argv, "--out", str(out)])
    return code, out, time.perf_counter() - t0


def _md_row(md, label):
    row = next(l for l in md.splitlines() if l.startswith(f"| {label} |"))
    return [c.strip() for c in row.strip().strip("|").split("|")][1:]


def test_c1_rank_reproduction(tmp_path):
    code, out, secs = _cli(tmp_path, "rank", "--results", str(DATA / "full_results_mean.csv"),
                           "--stat", "mean", "--metric", "MSE",
                           "--models", *frozen.MODELS_8)
    rep = json.loads((out / "rank.json").read_text())
    printed = ingest_table(FIXTURES / "table2_avg.csv", "MSE")
    cell_err = max(abs(rep["values"][f"{m}|{d}"] - v) for (m, d), v in printed.values.items())
    ranks = {}
    for line in (FIXTURES / "table2_summary.csv").read_text().splitlines()[1:]:
        m, row, met, v = line.split(",")
        if row == "Rank" and met == "MSE":
            ranks[m] = float(v)
    rank_err = max(abs(rep["avg_rank"][m] - r) for m, r in ranks.items())
    ok = code == 0 and cell_err <= 0.001 and rank_err <= 0.2 and secs < 1.0 \
        and abs(rep["avg_rank"]["PatchTST"] - 3.5) <= 0.2
    record_acceptance(1, ok, f"max |Avg cell diff| = {cell_err:.5f} (tol 0.001), "
                             f"max |rank diff| = {rank_err:.3f} (tol 0.2), "
                             f"PatchTST rank {rep['avg_rank']['PatchTST']:.2f}, {secs:.3f}s")
    assert ok


def test_c2_friedman_reproduction():
    table = ingest_table(FIXTURES / "table2_avg.csv", "MAE").merge(
        ingest_table(DATA / "ipatch_mean_avg.csv", "MAE")).subset(models=frozen.MODELS_9)
    rep = friedman_table(table)
    rank_sum = sum(rep.avg_ranks.values())
    rank_err = max(abs(rep.avg_ranks[m] - r) for m, r in frozen.PUBLISHED_RANK_MAE_9.items())
    ok = (abs(rep.chi2 - frozen.PUBLISHED_FRIEDMAN_CHI2) <= 0.25
          and abs(rep.p_value - frozen.PUBLISHED_FRIEDMAN_P) <= 0.02
          and abs(rank_sum - 45.0) <= 0.02 and rank_err <= 0.15
          and (rep.n_datasets, rep.n_models) == (14, 9))
    record_acceptance(2, ok, f"chi2_F = {rep.chi2:.3f} (9.33 +/- 0.25), p = {rep.p_value:.4f} "
                             f"(0.31 +/- 0.02), rank sum {rank_sum:.3f}, "
                             f"max |rank diff| {rank_err:.3f} (tol 0.15)")
    assert ok


def test_c3_sign_test(tmp_path):
    a = np.zeros(14)
    b = np.r_[np.ones(11), -np.ones(3)]
    rep = sign_test(a, b)
    code, out, _ = _cli(tmp_path, "signtest", "--results", str(DATA / "full_results_mean.csv"),
                        str(DATA / "ipatch_mean.csv"), "--metric", "MAE",
                        "--a", "iPatch", "--b", "iTransformer")
    cli = json.loads((out / "signtest.json").read_text())["report"]
    ok = (rep.p_one_sided_exact == frozen.ORACLE_SIGN_ONE_SIDED
          and abs(rep.p_two_sided - 0.05737) <= 1e-5
          and code == 0 and cli["wins_a"] == 11 and cli["n_effective"] == 14
          and abs(cli["p_two_sided"] - 0.05737) <= 1e-5)
    record_acceptance(3, ok, f"one-sided = {rep.p_one_sided_exact} "
                             f"(= 470/16384: {rep.p_one_sided_exact == Fraction(470, 16384)}), "
                             f"two-sided = {rep.p_two_sided:.6f}; CLI iPatch vs iTransformer "
                             f"MAE: {cli['wins_a']}/{cli['n_effective']} wins")
    assert ok


def test_c4_xi_reproduction(efficiency):
    t0 = time.perf_counter()
    table = ingest_table(FIXTURES / "table2_avg.csv", "MSE")
    worst = 0.0
    for name, phi in (("FLOPS", (K.FLOPS,)), ("PARAMS", (K.PARAMS,))):
        rep = xi_leaderboard(table, efficiency, XiSpec("DLinear", phi))
        for m, target in frozen.PUBLISHED_XI[name]["A"].items():
            worst = max(worst, abs(rep.per_model[m] - target))
    params = xi_leaderboard(table, efficiency, XiSpec("DLinear", (K.PARAMS,))).per_model
    train = xi_leaderboard(table, efficiency,
                           XiSpec("DLinear", (K.TRAIN_THROUGHPUT, K.TRAIN_MEMORY))).per_model
    col_b = xi_leaderboard(table, efficiency, XiSpec("DLinear", (K.PARAMS,)),
                           ["MotorImagery"]).per_model
    secs = time.perf_counter() - t0
    anchors = (abs(params["iTransformer"] - 1.27) <= 0.05 and abs(params["S-Mamba"] - 1.39) <= 0.05
               and abs(train["PatchTST"] - 0.91) <= 0.05)
    ok = worst <= 0.05 and anchors and col_b["S-Mamba"] < col_b["iTransformer"] and secs < 1.0
    record_acceptance(4, ok, f"max |xi - published| over FLOPs/#params column A = {worst:.3f} "
                             f"(tol 0.05); iTransformer {params['iTransformer']:.3f}, S-Mamba "
                             f"{params['S-Mamba']:.3f}, PatchTST train {train['PatchTST']:.3f}; "
                             f"column B S-Mamba {col_b['S-Mamba']:.3f} < iTransformer "
                             f"{col_b['iTransformer']:.3f}; {secs:.3f}s")
    assert ok


def test_c5_robustness_reproduction(mean_cube):
    cube = mean_cube.filter(models=frozen.MODELS_8)
    cfg = RobustnessConfig(k_samples=5000, master_seed=0)
    t0 = time.perf_counter()
    full = run_robustness(cube, cfg)
    no_mi = run_robustness(cube.filter(exclude_datasets=("MotorImagery",)), cfg)
    secs = time.perf_counter() - t0
    identical = all(run_robustness(cube, cfg, workers=w) == full for w in (2, 4, 8, 16))
    s = full.per_model["S-Mamba"]
    p = no_mi.per_model["PatchTST"]
    ok = (full.ranking()[0] == "S-Mamba" and abs(s.win_pct - 55.7) <= 3.0
          and abs(s.mean_error - 0.49) <= 0.02 and abs(s.std_error - 0.16) <= 0.03
          and no_mi.ranking()[0] == "PatchTST" and abs(p.win_pct - 46.8) <= 3.0
          and abs(p.mean_error - 0.45) <= 0.02 and identical and secs < 5.0)
    record_acceptance(5, ok, f"S-Mamba {s.win_pct:.2f}% {s.mean_error:.3f}+/-{s.std_error:.3f}; "
                             f"w/o MotorImagery PatchTST {p.win_pct:.2f}% {p.mean_error:.3f}; "
                             f"workers 1-16 bit-identical: {identical}; {secs:.3f}s")
    assert ok


def _toy(arr):
    n, M, H = arr.shape
    return ResultsCube(tuple(ResultRecord(f"m{i}", f"d{j}", 96 * (k + 1), 0, ErrorMetricKind.MSE,
                                          float(arr[i, j, k]))
                             for i in range(n) for j in range(M) for k in range(H)))


def test_c6_exhaustive_oracle():
    K = 200_000
    worst_z = 0.0
    for c in range(20):
        rng = np.random.default_rng(1000 + c)
        arr = rng.random((3, 3, 2))
        exact = exact_win_probabilities(arr)
        rep = run_robustness(_toy(arr), RobustnessConfig(k_samples=K, master_seed=c))
        for i, p in enumerate(exact):
            mc = rep.per_model[f"m{i}"].win_pct / 100
            se = math.sqrt(p * (1 - p) / K)
            z = abs(mc - p) / se if se > 0 else (0.0 if mc == p else math.inf)
            worst_z = max(worst_z, z)
    ok = worst_z <= 3.0
    record_acceptance(6, ok, f"20 cubes (M=3, H=2, K=200000): max |MC - exact| = "
                             f"{worst_z:.2f} standard errors (tol 3)")
    assert ok


def test_c7_special_functions():
    xs = np.linspace(0.0, 80.0, 100)
    closed = max(abs(chi2_sf(x, 2) - math.exp(-x / 2)) for x in xs)
    val = chi2_sf(9.33, 8)
    quad = chi2_sf_quad(9.33, 8)
    sums = all(sum(binomial_pmf(n, k) for k in range(n + 1)) == 1 for n in range(1, 31))
    ok = closed <= 1e-12 and abs(val - quad) <= 5e-4 and sums
    record_acceptance(7, ok, f"dof=2 max error {closed:.1e} (tol 1e-12); chi2_sf(9.33, 8) = "
                             f"{val:.6f}, quadrature oracle {quad:.6f}; binomial sums exact for "
                             f"n <= 30: {sums}")
    assert ok


@pytest.mark.xfail(strict=True, reason="the stated literal 0.3147 lies 5.3e-4 from the true "
                                       "tail 0.315227 (quadrature); see decisions ledger")
def test_c7_literal_target():
    val = chi2_sf(9.33, 8)
    ok = abs(val - frozen.SPEC_CHI2_SF_933_8) <= 5e-4
    record_acceptance("7 (literal 0.3147)", ok,
                      f"chi2_sf(9.33, 8) = {val:.6f} vs stated 0.3147 +/- 5e-4 "
                      f"(|diff| = {abs(val - 0.3147):.2e}); the oracle value "
                      f"{frozen.ORACLE_CHI2_SF_933_8:.6f} is the correct tail")
    assert ok


def test_c8_feature_properties():
    rng = np.random.default_rng(2024)
    checks = {}
    checks["pca univariate = 1"] = pca_ev1(rng.standard_normal(500)) == 1.0
    t = np.arange(2048)
    checks["sine spectral <= 0.05"] = spectral_entropy(np.sin(2 * np.pi * 16 * t / 2048)) <= 0.05
    checks["noise spectral >= 0.9"] = spectral_entropy(rng.standard_normal(4096)) >= 0.9
    fd = (higuchi_fd(np.arange(2000.0)), higuchi_fd(np.cumsum(rng.standard_normal(10_000))),
          higuchi_fd(rng.standard_normal(10_000)))
    checks["higuchi 1/1.5/2"] = all(abs(v - e) <= 0.1 for v, e in zip(fd, (1.0, 1.5, 2.0)))
    gammas = {}
    for rho in (0.0, 0.5, 0.9, 1.0):
        e = rng.standard_normal(5000)
        y = np.empty(5000)
        y[0] = e[0]
        for i in range(1, 5000):
            y[i] = rho * y[i - 1] + e[i]
        gammas[rho] = adf_gamma(y, lags=0)
    checks["adf rho-1"] = all(abs(g - (r - 1)) <= 0.05 for r, g in gammas.items())
    exact = True
    for n in (10, 50, 120, 200):
        x = np.round(rng.standard_normal(n), 1)
        exact &= sample_entropy(x) == sampen_bruteforce(x)
    checks["sampen == O(N^2) oracle"] = exact
    ok = all(checks.values())
    record_acceptance(8, ok, "; ".join(f"{k}: {v}" for k, v in checks.items())
                      + f" (FD {fd[0]:.3f}/{fd[1]:.3f}/{fd[2]:.3f}; gamma "
                      + "/".join(f"{g:.3f}" for g in gammas.values()) + ")")
    assert ok


def test_c9_visualization(tmp_path, table2_mse):
    spec = build_radar(table2_mse, RadarMode.RELATIVE)
    axes_ok = True
    for i, _ in enumerate(spec.axes):
        vals = [spec.per_model[m][i] for m in spec.per_model]
        raw = table2_mse.matrix()[i]
        n_best = int(np.sum(raw == raw.min()))
        n_worst = int(np.sum(raw == raw.max()))
        axes_ok &= vals.count(1.0) == n_best and vals.count(0.0) == n_worst
    a = emit_svg(spec, tmp_path / "one.svg").read_bytes()
    b = emit_svg(spec, tmp_path / "two.svg").read_bytes()
    code, out, _ = _cli(tmp_path, "radar", "--table", str(FIXTURES / "table2_avg.csv"),
                        "--metric", "MSE")
    both = (out / "radar_absolute.svg").exists() and (out / "radar_relative.svg").exists()
    ok = axes_ok and a == b and code == 0 and both
    record_acceptance(9, ok, f"relative axes hold one 1.0 and one 0.0 (modulo ties): {axes_ok}; "
                             f"double emission byte-identical: {a == b}; one command wrote "
                             f"absolute + relative: {both}")
    assert ok


def test_c10_locf_exchange(tmp_path):
    code, out, _ = _cli(tmp_path, "rank", "--results", str(DATA / "full_results_mean.csv"),
                        "--metric", "MSE")
    md = (out / "rank.md").read_text()
    header = _md_row(md, "Dataset")
    cells = _md_row(md, "Exchange")
    best = [header[i] for i, c in enumerate(cells) if c.startswith("**")]
    value = cells[header.index("LOCF")].strip("*")
    ok = code == 0 and best == ["LOCF"] and float(value) == frozen.PUBLISHED_EXCHANGE_LOCF_AVG_MSE
    record_acceptance(10, ok, f"Exchange Avg MSE row best = {best} at {value} (published: "
                              f"LOCF 0.341)")
    assert ok
