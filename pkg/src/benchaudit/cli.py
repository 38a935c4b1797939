"""Command-line entry point.

Every subcommand writes ``<name>.json`` (machine-readable report),
``<name>.md`` (human summary) and ``<name>.manifest.json`` into ``--out``.
Exit codes: 0 success, 2 input validation failure, 3 numerical failure.
"""

from __future__ import annotations

import argparse
import datetime as _dt
import hashlib
import math
import shlex
import sys
from dataclasses import dataclass, field
from pathlib import Path

from . import __version__
from .aggregate import (
    AggregatedTable,
    Statistic,
    average_over_horizons,
    ingest_table,
    rank_models,
)
from .efficiency import DEFAULT_WEIGHT, XiSpec, auto_baseline, xi_leaderboard
from .errors import BenchAuditError, NumericalError, ValidationError
from .report import (
    RadarMode,
    build_radar,
    dump_json,
    emit_svg,
    kv_markdown,
    render_table,
)
from .results import EfficiencyKind, ErrorMetricKind, ingest_efficiency, ingest_many
from .robustness import RobustnessConfig, run_robustness
from .seriesfeat import (
    DEFAULT_BINS,
    DEFAULT_KMAX,
    DEFAULT_M,
    DEFAULT_R,
    SAMPEN_CHUNK,
    characterize,
    evaluate_locf,
    read_series,
)
from .stattests import friedman_table, sign_test_table

EXIT_OK, EXIT_VALIDATION, EXIT_NUMERICAL = 0, 2, 3


@dataclass
class RunManifest:
    command_line: str
    input_digests: dict[str, str]
    master_seed: int | None
    tool_version: str
    timestamp: str
    outputs: list[str] = field(default_factory=list)


def sha256_file(path) -> str:
    h = hashlib.sha256()
    with open(path, "rb") as fh:
        for chunk in iter(lambda: fh.read(1 << 20), b""):
            h.update(chunk)
    return h.hexdigest()


class Run:
    """Collects outputs of one invocation and writes them with a manifest."""

    def __init__(self, args, argv, name):
        self.out = Path(args.out)
        self.name = name
        self.argv = argv
        self.inputs: list[str] = []
        self.seed = None
        self.outputs: list[str] = []

    def input(self, path):
        self.inputs.append(str(path))
        return path

    def write(self, filename, text):
        self.out.mkdir(parents=True, exist_ok=True)
        p = self.out / filename
        p.write_text(text, encoding="utf-8")
        self.outputs.append(str(p))
        return p

    def emit(self, report_obj, markdown, stem=None):
        stem = stem or self.name
        self.write(f"{stem}.json", dump_json(report_obj))
        self.write(f"{stem}.md", markdown)
        sys.stdout.write(markdown)

    def finish(self):
        digests = {p: sha256_file(p) for p in self.inputs}
        ts = _dt.datetime.now(_dt.timezone.utc).isoformat(timespec="seconds")
        manifest = RunManifest(shlex.join(["benchaudit", *self.argv]), digests, self.seed,
                               __version__, ts, list(self.outputs))
        self.write(f"{self.name}.manifest.json", dump_json(manifest))


# ---------------------------------------------------------------- inputs

def _add_output(p):
    p.add_argument("--out", default="benchaudit_out", help="output directory")


def _add_results(p, allow_table=True):
    p.add_argument("--results", nargs="+", action="extend", default=[],
                   help="per-horizon results file(s): model,dataset,horizon[,seed],metric,value")
    if allow_table:
        p.add_argument("--table", nargs="+", action="extend", default=[],
                       help="pre-aggregated table file(s): model,dataset,metric,value")
    p.add_argument("--metric", default="MSE", type=str.upper, choices=["MSE", "MAE"])
    p.add_argument("--stat", default="mean", choices=["mean", "min"],
                   help="seed aggregation statistic")
    p.add_argument("--horizons", nargs="+", type=int, default=None,
                   help="horizon subset to average over (default: all)")
    p.add_argument("--models", nargs="+", default=None, help="models to keep, in order")
    p.add_argument("--exclude-model", nargs="+", action="extend", default=[])
    p.add_argument("--exclude-dataset", nargs="+", action="extend", default=[])


def load_table(args, run) -> AggregatedTable:
    metric = ErrorMetricKind.parse(args.metric)
    if getattr(args, "table", None):
        if args.results:
            raise ValidationError("give either --results or --table, not both")
        table = None
        for p in args.table:
            part = ingest_table(run.input(p), metric)
            table = part if table is None else table.merge(part)
    elif args.results:
        cube = ingest_many([run.input(p) for p in args.results])
        table = average_over_horizons(cube, args.horizons, metric, Statistic.parse(args.stat))
    else:
        raise ValidationError("no input: pass --results (or --table)")
    return table.subset(models=args.models, exclude_models=tuple(args.exclude_model),
                        exclude_datasets=tuple(args.exclude_dataset))


# ------------------------------------------------------------- commands

def cmd_rank(args, run):
    table = load_table(args, run)
    ranks = rank_models(table)
    means = table.model_means()
    report = {"metric": table.metric, "statistic": table.statistic,
              "horizons": list(table.horizons_used), "models": table.models,
              "datasets": table.datasets, "values": table.values, "average": means,
              "ranks": ranks.ranks, "avg_rank": ranks.avg_rank}
    md = f"# Average {table.metric.value} and rank\n\n" + render_table(table)
    run.emit(report, md)
    run.write(f"{run.name}.csv", render_table(table, fmt="delimited"))
    return EXIT_OK


def cmd_friedman(args, run):
    table = load_table(args, run)
    rep = friedman_table(table)
    rows = {"N (datasets)": rep.n_datasets, "k (models)": rep.n_models,
            "chi2_F": rep.chi2, "dof": rep.dof, "p-value": rep.p_value}
    rows.update({f"avg rank {m}": r for m, r in rep.avg_ranks.items()})
    md = kv_markdown(f"Friedman test ({table.metric.value})", rows)
    md += "".join(f"\n> warning: {w}\n" for w in rep.warnings)
    run.emit(rep, md)
    return EXIT_OK


def cmd_signtest(args, run):
    table = load_table(args, run)
    for m in (args.a, args.b):
        if m not in table.models:
            raise ValidationError(f"model {m!r} not in the input")
    rep = sign_test_table(table, args.a, args.b)
    rows = {f"wins {args.a}": rep.wins_a, f"wins {args.b}": rep.wins_b,
            "raw ties": rep.ties_raw, "n (effective)": rep.n_effective,
            "p two-sided (primary)": rep.p_two_sided,
            f"p one-sided ({args.a} better)": rep.p_one_sided,
            "p two-sided exact": str(rep.p_two_sided_exact),
            "p one-sided exact": str(rep.p_one_sided_exact)}
    md = kv_markdown(f"Sign test {args.a} vs {args.b} ({table.metric.value}, "
                     f"{len(table.datasets)} datasets)", rows)
    run.emit({"a": args.a, "b": args.b, "metric": table.metric, "report": rep}, md)
    return EXIT_OK


def _robustness(args, run, cube, stem=None):
    if args.seed is None and not args.ephemeral:
        raise ValidationError("robustness needs --seed for a reproducible run "
                              "(or --ephemeral to draw a fresh seed)")
    seed = args.seed
    if seed is None:
        import secrets
        seed = secrets.randbits(63)
    run.seed = seed
    metric = ErrorMetricKind.parse(args.metric)
    cube = cube.filter(exclude_models=tuple(args.exclude_model),
                       exclude_datasets=tuple(args.exclude_dataset),
                       exclude_horizons=tuple(args.exclude_horizon))
    cfg = RobustnessConfig(k_samples=args.samples, master_seed=seed,
                           horizon_pool=tuple(args.horizons) if args.horizons else None,
                           metric=metric, models=tuple(args.models) if args.models else None,
                           statistic=Statistic.parse(args.stat))
    rep = run_robustness(cube, cfg, workers=args.workers)
    lines = [f"## Robustness over {rep.k_samples} sampled configurations "
             f"({metric.value}, seed {seed})", "",
             "| Model | Win % | Mean | Std |", "|---|---:|---:|---:|"]
    for m in rep.ranking():
        r = rep.per_model[m]
        lines.append(f"| {m} | {r.win_pct:.2f} | {r.mean_error:.4f} | {r.std_error:.4f} |")
    run.emit(rep, "\n".join(lines) + "\n", stem)
    return EXIT_OK


def cmd_robustness(args, run):
    if not args.results:
        raise ValidationError("no input: pass --results")
    cube = ingest_many([run.input(p) for p in args.results])
    return _robustness(args, run, cube)


def _xi(args, run, table, stem=None):
    eff = ingest_efficiency(run.input(args.efficiency))
    phi = tuple(EfficiencyKind.parse(k) for k in args.phi)
    baseline = args.baseline
    auto = baseline is None
    if auto:
        baseline = auto_baseline(eff, phi, table.models)
    spec = XiSpec(baseline, phi, args.weight, table.metric)
    rep = xi_leaderboard(table, eff, spec, dataset_filter=tuple(args.xi_exclude_dataset))
    lines = [f"## Efficiency-weighted score (baseline {baseline}"
             f"{', chosen automatically' if auto else ''}; "
             f"phi = {', '.join(k.value for k in phi)}; w = {args.weight})", "",
             "| Model | xi | error |", "|---|---:|---:|"]
    for m in sorted(rep.per_model, key=lambda m: -rep.per_model[m]):
        lines.append(f"| {m} | {rep.per_model[m]:.3f} | {rep.model_errors[m]:.4f} |")
    run.emit({"report": rep, "baseline_auto": auto}, "\n".join(lines) + "\n", stem)
    return EXIT_OK


def cmd_xi(args, run):
    args.xi_exclude_dataset = args.exclude_dataset
    args.exclude_dataset = []
    return _xi(args, run, load_table(args, run))


def cmd_characterize(args, run):
    reports = {}
    for path in args.series:
        sm = read_series(run.input(path), name=Path(path).stem, missing=args.missing,
                         stride=args.stride, delimiter=args.delimiter)
        reports[sm.name] = characterize(sm, bins=args.bins, m=args.m, r=args.r,
                                        lags=args.lags, k_max=args.kmax,
                                        max_chunk=args.chunk or None,
                                        per_channel=args.per_channel)
    lines = ["## Dataset characteristics", "",
             "| Dataset | T | C | Shannon | Spectral | SampEn | ADF gamma | Higuchi | PC1 |",
             "|---|---:|---:|---:|---:|---:|---:|---:|---:|"]
    for name, r in reports.items():
        lines.append(f"| {name} | {r.n_timesteps} | {r.n_channels} | {r.shannon_entropy:.3f} | "
                     f"{r.spectral_entropy:.3f} | {r.sample_entropy:.3f} | {r.adf_gamma:.3f} | "
                     f"{r.higuchi_fd:.3f} | {r.pca_ev1:.3f} |")
        lines.extend(f"\n> {name}: {f}" for f in r.flags)
    run.emit(reports, "\n".join(lines) + "\n")
    bad = [n for n, r in reports.items() if not math.isfinite(r.sample_entropy)]
    if bad:
        raise NumericalError(f"sample entropy has no matching templates for {', '.join(bad)}")
    return EXIT_OK


def cmd_radar(args, run):
    table = load_table(args, run)
    modes = [RadarMode.ABSOLUTE, RadarMode.RELATIVE] if args.mode == "both" \
        else [RadarMode(args.mode.upper())]
    specs = {}
    for mode in modes:
        spec = build_radar(table, mode)
        path = run.out / f"radar_{mode.value.lower()}.svg"
        run.out.mkdir(parents=True, exist_ok=True)
        emit_svg(spec, path, title=f"{table.metric.value}, {mode.value.lower()} scale")
        run.outputs.append(str(path))
        specs[mode.value] = spec
    md = "## Radar figures\n\n" + "".join(f"- `{p}`\n" for p in run.outputs)
    run.emit(specs, md)
    return EXIT_OK


def cmd_locf(args, run):
    sm = read_series(run.input(args.series), name=args.dataset or Path(args.series).stem,
                     missing=args.missing, stride=args.stride, delimiter=args.delimiter)
    rows = {}
    for h in args.horizon:
        mse, mae = evaluate_locf(sm, args.context, h, args.window_stride, args.standardize)
        rows[h] = {"MSE": mse, "MAE": mae}
    lines = [f"## LOCF on {sm.name} (context {args.context})", "",
             "| Horizon | MSE | MAE |", "|---:|---:|---:|"]
    lines += [f"| {h} | {v['MSE']:.4f} | {v['MAE']:.4f} |" for h, v in rows.items()]
    run.emit({"dataset": sm.name, "context": args.context, "per_horizon": rows},
             "\n".join(lines) + "\n")
    csv_lines = ["model,dataset,horizon,metric,value"]
    for h, v in rows.items():
        for met in ("MSE", "MAE"):
            csv_lines.append(f"LOCF,{sm.name},{h},{met},{v[met]!r}")
    run.write(f"{run.name}_results.csv", "\n".join(csv_lines) + "\n")
    return EXIT_OK


def cmd_report(args, run):
    if not args.all:
        raise ValidationError("report currently supports only --all")
    if not args.results:
        raise ValidationError("no input: pass --results")
    args.table = []
    cube = ingest_many([run.input(p) for p in args.results])
    metric = ErrorMetricKind.parse(args.metric)
    full = average_over_horizons(cube, args.horizons, metric, Statistic.parse(args.stat))
    table = full.subset(models=args.models, exclude_models=tuple(args.exclude_model),
                        exclude_datasets=tuple(args.exclude_dataset))
    run.emit({"values": table.values, "avg_rank": rank_models(table).avg_rank},
             f"# Average {metric.value} and rank\n\n" + render_table(table), "rank")
    fr = friedman_table(table)
    run.emit(fr, kv_markdown("Friedman test", {"chi2_F": fr.chi2, "dof": fr.dof,
                                               "p-value": fr.p_value}), "friedman")
    args.exclude_horizon = []
    if args.models is None:
        args.models = list(table.models)
    _robustness(args, run, cube.filter(datasets=table.datasets), "robustness")
    if args.efficiency:
        args.xi_exclude_dataset = []
        _xi(args, run, table, "xi")
    return EXIT_OK


# ---------------------------------------------------------------- parser

def _add_series(p, multiple):
    if multiple:
        p.add_argument("--series", nargs="+", required=True, help="wide series file(s)")
    else:
        p.add_argument("--series", required=True, help="wide series file")
    p.add_argument("--missing", choices=["reject", "ffill"], default="reject",
                   help="missing-value policy")
    p.add_argument("--stride", type=int, default=1, help="keep every n-th row on ingestion")
    p.add_argument("--delimiter", default=",")


def _add_robustness_opts(p):
    p.add_argument("--samples", type=int, default=5000, help="sampled configurations K")
    p.add_argument("--seed", type=int, default=None, help="master seed")
    p.add_argument("--ephemeral", action="store_true",
                   help="allow running without --seed (seed is drawn and recorded)")
    p.add_argument("--workers", type=int, default=1)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="benchaudit", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("rank", help="horizon-averaged errors and average ranks")
    _add_results(p)
    _add_output(p)

    p = sub.add_parser("friedman", help="Friedman test over datasets")
    _add_results(p)
    _add_output(p)

    p = sub.add_parser("signtest", help="exact sign test between two models")
    _add_results(p)
    p.add_argument("--a", required=True, help="first model")
    p.add_argument("--b", required=True, help="second model")
    _add_output(p)

    p = sub.add_parser("robustness", help="win rates under random dataset/horizon subsets")
    _add_results(p, allow_table=False)
    p.add_argument("--exclude-horizon", nargs="+", type=int, action="extend", default=[])
    _add_robustness_opts(p)
    _add_output(p)

    p = sub.add_parser("xi", help="efficiency-weighted score against a baseline")
    _add_results(p)
    p.add_argument("--efficiency", required=True, help="efficiency file: model,kind,value")
    p.add_argument("--baseline", default=None,
                   help="baseline model (default: the model dominating all others)")
    p.add_argument("--phi", action="append", required=True,
                   choices=[k.value for k in EfficiencyKind], type=str.upper,
                   help="efficiency kind (repeatable)")
    p.add_argument("--weight", type=float, default=DEFAULT_WEIGHT)
    _add_output(p)

    p = sub.add_parser("characterize", help="dataset statistics of raw series")
    _add_series(p, multiple=True)
    p.add_argument("--bins", type=int, default=DEFAULT_BINS)
    p.add_argument("--m", type=int, default=DEFAULT_M, help="sample entropy embedding")
    p.add_argument("--r", type=float, default=DEFAULT_R, help="sample entropy tolerance (std)")
    p.add_argument("--lags", type=int, default=None, help="ADF lags (default: Schwert rule)")
    p.add_argument("--kmax", type=int, default=DEFAULT_KMAX, help="Higuchi k_max")
    p.add_argument("--chunk", type=int, default=SAMPEN_CHUNK,
                   help="sample entropy chunk length (0: no chunking)")
    p.add_argument("--per-channel", action="store_true")
    _add_output(p)

    p = sub.add_parser("radar", help="radar figures in absolute and relative scale")
    _add_results(p)
    p.add_argument("--mode", choices=["both", "absolute", "relative"], default="both")
    _add_output(p)

    p = sub.add_parser("locf", help="evaluate the last-value forecast on a raw series")
    _add_series(p, multiple=False)
    p.add_argument("--context", type=int, default=96, help="input window length")
    p.add_argument("--horizon", type=int, nargs="+", default=[96, 192, 336, 720])
    p.add_argument("--window-stride", type=int, default=1, help="step between forecast origins")
    p.add_argument("--standardize", action="store_true", help="z-score channels first")
    p.add_argument("--dataset", default=None, help="dataset name for the results file")
    _add_output(p)

    p = sub.add_parser("report", help="rank, friedman, robustness and xi in one bundle")
    p.add_argument("--all", action="store_true", required=True)
    _add_results(p, allow_table=False)
    p.add_argument("--efficiency", default=None)
    p.add_argument("--baseline", default=None)
    p.add_argument("--phi", action="append", default=None, type=str.upper,
                   choices=[k.value for k in EfficiencyKind])
    p.add_argument("--weight", type=float, default=DEFAULT_WEIGHT)
    _add_robustness_opts(p)
    _add_output(p)
    return parser


COMMANDS = {"rank": cmd_rank, "friedman": cmd_friedman, "signtest": cmd_signtest,
            "robustness": cmd_robustness, "xi": cmd_xi, "characterize": cmd_characterize,
            "radar": cmd_radar, "locf": cmd_locf, "report": cmd_report}


def main(argv=None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    args = build_parser().parse_args(argv)
    if args.command == "report" and args.efficiency and not args.phi:
        args.phi = ["PARAMS"]
    run = Run(args, argv, args.command)
    code = EXIT_OK
    try:
        code = COMMANDS[args.command](args, run)
    except ValidationError as exc:
        print(f"benchaudit {args.command}: error: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    except NumericalError as exc:
        print(f"benchaudit {args.command}: numerical failure: {exc}", file=sys.stderr)
        code = EXIT_NUMERICAL
    except OSError as exc:
        print(f"benchaudit {args.command}: error: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    except BenchAuditError as exc:
        print(f"benchaudit {args.command}: error: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    if run.outputs:
        run.finish()
    return code


if __name__ == "__main__":
    sys.exit(main())
