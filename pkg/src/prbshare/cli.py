"""Command-line front end.

Exit status: 0 when every output was written, 2 for usage or validation
errors (bad flags, missing or malformed inputs), 1 for anything else.
"""

from __future__ import annotations

import argparse
import csv
import datetime as _dt
import hashlib
import json
import logging
import sys
from pathlib import Path

import numpy as np

from . import __version__
from .allocate import (
    AllocationError,
    AllocationProblem,
    DemandStats,
    Variant,
    convexity_check,
    default_gammas,
    gamma_sweep,
    solve,
    stats_from_series,
    write_sweep_csv,
)
from .control import ControlError, LoopConfig, Transcript, run_loop, transcript_report
from .forecast import (
    ForecastError,
    ModelSpec,
    SplitConfig,
    grid_search,
    load_grid,
    select_model,
    statistical_only,
)
from .forecast.evaluate import write_predictions
from .ingest import GRANULARITIES, IngestError, parse_dci_log, read_series, to_series, write_series
from .seeding import derive_seed
from .synthgen import SynthConfig, SynthError, generate_surrogate, similarity_report

log = logging.getLogger("prbshare")

VALIDATION_ERRORS = (IngestError, ForecastError, AllocationError, ControlError, SynthError,
                     FileNotFoundError, IsADirectoryError, json.JSONDecodeError, KeyError)


class UsageError(Exception):
    pass


# -- helpers ---------------------------------------------------------------

def sha256_file(path) -> str:
    h = hashlib.sha256()
    with open(path, "rb") as fh:
        for chunk in iter(lambda: fh.read(1 << 16), b""):
            h.update(chunk)
    return h.hexdigest()


def _jsonable(v):
    if isinstance(v, Path):
        return str(v)
    if isinstance(v, (list, tuple)):
        return [_jsonable(x) for x in v]
    return v


def write_manifest(args, inputs, outputs) -> Path:
    cfg = {k: _jsonable(v) for k, v in sorted(vars(args).items()) if k not in ("func", "out")}
    manifest = {
        "command": args.command,
        "config_digest": hashlib.sha256(json.dumps(cfg, sort_keys=True).encode()).hexdigest(),
        "input_digests": [sha256_file(p) for p in inputs],
        "output_digests": {Path(p).name: sha256_file(p) for p in outputs},
        "tool_version": __version__,
        "timestamp": _dt.datetime.now(_dt.timezone.utc).isoformat(timespec="seconds"),
    }
    stem = f"{args.command}_{args.name}" if getattr(args, "name", None) else args.command
    path = Path(args.out) / f"{stem}_manifest.json"
    path.write_text(json.dumps(manifest, indent=2) + "\n", encoding="utf-8")
    return path


def write_json(obj, path) -> Path:
    path = Path(path)
    path.write_text(json.dumps(obj, indent=2, sort_keys=True) + "\n", encoding="utf-8")
    return path


def _existing(path) -> Path:
    p = Path(path)
    if not p.is_file():
        raise UsageError(f"no such file: {p}")
    return p


def _csv_floats(text: str, what: str) -> list[float]:
    try:
        return [float(x) for x in str(text).split(",") if x.strip()]
    except ValueError:
        raise UsageError(f"{what}: expected comma-separated numbers, got {text!r}") from None


def _stats_arg(value) -> tuple[DemandStats, list]:
    """A ``mean,var,max`` triple or a stats JSON file written by ``forecast``."""
    if "," in str(value):
        m, v, x = _csv_floats(value, "stats")
        return DemandStats(m, v, x), []
    path = _existing(value)
    return DemandStats.from_dict(json.loads(path.read_text(encoding="utf-8"))), [path]


def _demands_arg(value):
    """Actual demands from a predictions CSV (observed column) or a series CSV."""
    path = _existing(value)
    with path.open(newline="", encoding="utf-8") as fh:
        reader = csv.DictReader(fh)
        col = "observed" if "observed" in (reader.fieldnames or []) else "value"
        return np.array([float(r[col]) for r in reader]), path


def _fmt_pool(x: float) -> str:
    return str(int(x)) if float(x).is_integer() else str(x).replace(".", "p")


# -- commands --------------------------------------------------------------

def cmd_ingest(args):
    src = _existing(args.input)
    records = parse_dci_log(src, args.dci_format)
    if not records:
        raise UsageError("no records left after filtering")
    series = to_series(records, GRANULARITIES[args.granularity], label=args.label)
    out_csv, sidecar = write_series(series, Path(args.out) / f"{args.name}.csv")
    print(f"{len(records)} records -> {len(series)} samples ({args.granularity}), gaps={series.gap_count}")
    return [src], [out_csv, sidecar]


def cmd_synth(args):
    ref_path = _existing(args.reference)
    ref = read_series(ref_path)
    cfg = SynthConfig(seed=derive_seed(args.seed, "synth"), block_len=args.block_len,
                      jitter_std=args.jitter, target_len=args.length or len(ref))
    out = generate_surrogate(ref, cfg, label=args.label)
    paths = list(write_series(out, Path(args.out) / f"{args.name}.csv"))
    rep = similarity_report(ref, out, n_bins=args.bins)
    paths.append(write_json(rep.to_dict(), Path(args.out) / f"{args.name}_similarity.json"))
    print(f"KS statistic vs reference: {rep.ks_statistic:.4f}")
    return [ref_path], paths


def _load_grid_arg(source, stat_only: bool):
    try:
        grid = load_grid(source)
    except FileNotFoundError:
        raise UsageError(f"no such grid: {source}") from None
    except ForecastError as exc:
        raise UsageError(str(exc)) from None
    if stat_only:
        grid = statistical_only(grid)
    if not grid:
        raise UsageError("model grid is empty")
    return grid


def cmd_forecast(args):
    series_path = _existing(args.series)
    series = read_series(series_path)
    grid = _load_grid_arg(args.grid, args.statistical_only)
    grid = [ModelSpec(s.kind, s.params, derive_seed(args.seed, "forecast", s.label(), s.seed))
            for s in grid]
    ranked = grid_search(series, grid, SplitConfig(args.train_fraction), workers=args.workers)
    out = Path(args.out)
    name = args.name
    paths = [write_json({"ranked": [r.to_dict() for r in ranked],
                         "failed": [f.to_dict() for f in ranked.failures]},
                        out / f"{name}_reports.json")]
    rmse_csv = out / f"{name}_rmse.csv"
    with rmse_csv.open("w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["rank", "kind", "params", "rmse"])
        for i, r in enumerate(ranked, start=1):
            w.writerow([i, r.spec.kind, r.spec.params_key(), repr(r.rmse)])
    paths.append(rmse_csv)
    for r in ranked:
        print(f"{r.spec.kind:6s} rmse={r.rmse:.4f} {r.spec.params_key()}")
    for f in ranked.failures:
        print(f"{f.spec.kind:6s} FAILED {f.reason}")
    if len(ranked):
        best = ranked[0]
        write_predictions(best, out / f"{name}_predictions.csv")
        paths.append(out / f"{name}_predictions.csv")
        source = best.observed if args.observed_stats else best.predictions
        paths.append(write_json(stats_from_series(source).to_dict(), out / f"{name}_stats.json"))
    if args.select:
        spec = select_model(ranked)
        paths.append(write_json({"spec": spec.to_dict(), "rmse": ranked[0].rmse},
                                out / f"{name}_selected.json"))
    return [series_path], paths


def cmd_allocate(args):
    path = _existing(args.problem)
    prob = AllocationProblem.from_dict(json.loads(path.read_text(encoding="utf-8")))
    res = solve(prob)
    conv = convexity_check(prob, seed=derive_seed(args.seed, "convexity"))
    doc = {"problem": prob.to_dict(), "result": res.to_dict(),
           "convexity": {"hessian_diag": list(conv.hessian_diag), "ok": conv.ok,
                         "max_midpoint_violation": conv.max_midpoint_violation}}
    print(f"n_a={res.n_a:g} n_b={res.n_b:g} objective={res.objective:.6g} fairness={res.fairness:.4f}")
    return [path], [write_json(doc, Path(args.out) / "allocation.json")]


def cmd_sweep(args):
    step = args.gamma_step
    if not 0 < step < 1:
        raise UsageError(f"--gamma-step must lie in (0, 1), got {step}")
    gammas = default_gammas(step)
    pools = _csv_floats(args.pool, "--pool")
    if not pools or any(p <= 0 for p in pools):
        raise UsageError("--pool needs positive sizes")
    variants = [Variant.parse(v.strip()) for v in args.variants.split(",") if v.strip()]
    stats_a, in_a = _stats_arg(args.stats_a)
    stats_b, in_b = _stats_arg(args.stats_b)
    inputs = in_a + in_b
    dem_a, dem_b = [stats_a.mean], [stats_b.mean]
    if args.demands_a:
        dem_a, p = _demands_arg(args.demands_a)
        inputs.append(p)
    if args.demands_b:
        dem_b, p = _demands_arg(args.demands_b)
        inputs.append(p)
    outputs = []
    for pool in pools:
        for v in variants:
            recs = gamma_sweep(stats_a, stats_b, pool, v, not args.continuous, gammas, dem_a, dem_b)
            path = Path(args.out) / f"sweep_N{_fmt_pool(pool)}_{v.value}.csv"
            write_sweep_csv(recs, path)
            outputs.append(path)
            fair = [r.gamma for r in recs if r.fairness == 1.0]
            span = f"[{fair[0]:.2f}, {fair[-1]:.2f}]" if fair else "none"
            print(f"N_R={pool:g} {v.value}: F=1 for gamma in {span}")
    return inputs, outputs


def cmd_simulate(args):
    if args.seed_given is False:
        raise UsageError("simulate requires an explicit --seed")
    if not args.lte or not args.nr:
        raise UsageError("simulate needs both --lte and --nr series")
    lte_path, nr_path = _existing(args.lte), _existing(args.nr)
    grid = _load_grid_arg(args.grid, args.statistical_only)
    grid_nr = _load_grid_arg(args.grid_nr, args.statistical_only) if args.grid_nr else ()
    cfg = LoopConfig(retrain_every=args.retrain_every, allocate_every=args.allocate_every,
                     pool_size=args.pool, gamma=args.gamma, variant=args.variant, grid=grid,
                     grid_nr=grid_nr,
                     seed=args.seed, warmup=args.warmup, split=SplitConfig(args.train_fraction),
                     integer_mode=not args.continuous, use_observed_stats=args.observed_stats)
    transcript = run_loop(read_series(lte_path), read_series(nr_path), cfg)
    out = Path(args.out)
    tpath = out / "transcript.jsonl"
    transcript.write(tpath)
    summary = transcript_report(transcript)
    spath = write_json(summary, out / "summary.json")
    print(json.dumps(summary, indent=2, sort_keys=True))
    return [lte_path, nr_path], [tpath, spath]


def cmd_report(args):
    out = Path(args.out)
    if args.transcript:
        path = _existing(args.transcript)
        summary = transcript_report(Transcript.read(path))
        print(json.dumps(summary, indent=2, sort_keys=True))
        return [path], [write_json(summary, out / "report_summary.json")]
    if not (args.series_a and args.series_b):
        raise UsageError("report needs --transcript or both --series-a and --series-b")
    pa, pb = _existing(args.series_a), _existing(args.series_b)
    rep = similarity_report(read_series(pa), read_series(pb), n_bins=args.bins)
    cdf = out / "report_cdf.csv"
    with cdf.open("w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["value", "cdf_a", "cdf_b"])
        for row in zip(rep.cdf_grid, rep.cdf_a, rep.cdf_b):
            w.writerow([repr(float(x)) for x in row])
    print(json.dumps(rep.to_dict(), indent=2, sort_keys=True))
    return [pa, pb], [write_json(rep.to_dict(), out / "report_similarity.json"), cdf]


# -- parser ----------------------------------------------------------------

def _global_options(parser, suppress: bool):
    # subcommands repeat the global flags without defaults so values given
    # before the subcommand name are not overwritten
    dflt = (lambda v: argparse.SUPPRESS) if suppress else (lambda v: v)
    parser.add_argument("--seed", type=int, default=dflt(None), help="root seed (u64)")
    parser.add_argument("--out", default=dflt("."), help="output directory")
    parser.add_argument("--config", default=dflt(None), help="JSON file of option defaults")
    parser.add_argument("-v", "--verbose", action="store_true", default=dflt(False))


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    _global_options(common, suppress=True)

    ap = argparse.ArgumentParser(prog="prbshare",
                                 description="PRB demand forecasting and LTE/NR pool partitioning")
    _global_options(ap, suppress=False)
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("ingest", parents=[common], help="DCI log -> PRB series")
    p.add_argument("input")
    p.add_argument("--granularity", choices=sorted(GRANULARITIES), default="hour")
    p.add_argument("--dci-format", default=None, help="keep only this DCI format, e.g. 2B")
    p.add_argument("--label", default="LTE")
    p.add_argument("--name", default="lte", help="output file stem")
    p.set_defaults(func=cmd_ingest)

    p = sub.add_parser("synth", parents=[common], help="surrogate NR series from a reference")
    p.add_argument("--reference", required=True)
    p.add_argument("--block-len", type=int, default=24)
    p.add_argument("--jitter", type=float, default=0.5)
    p.add_argument("--length", type=int, default=None)
    p.add_argument("--bins", type=int, default=50)
    p.add_argument("--label", default="NR")
    p.add_argument("--name", default="nr")
    p.set_defaults(func=cmd_synth)

    p = sub.add_parser("forecast", parents=[common], help="grid search + walk-forward RMSE")
    p.add_argument("--series", required=True)
    p.add_argument("--grid", default="lte_hour", help="grid JSON file or bundled name")
    p.add_argument("--statistical-only", action="store_true", help="drop MLP specs")
    p.add_argument("--train-fraction", type=float, default=0.66)
    p.add_argument("--select", action="store_true", help="also write the winning spec")
    p.add_argument("--observed-stats", action="store_true",
                   help="demand stats from observed test data instead of predictions")
    p.add_argument("--workers", type=int, default=1)
    p.add_argument("--name", default="forecast")
    p.set_defaults(func=cmd_forecast)

    p = sub.add_parser("allocate", parents=[common], help="solve one allocation problem")
    p.add_argument("--problem", required=True, help="problem JSON")
    p.set_defaults(func=cmd_allocate)

    p = sub.add_parser("sweep", parents=[common], help="gamma sweeps per pool size and variant")
    p.add_argument("--pool", default="10,40,50")
    p.add_argument("--variants", default="max,avg")
    p.add_argument("--gamma-step", type=float, default=0.01)
    p.add_argument("--stats-a", default="21.52,12.37,26.31", help="mean,var,max or stats JSON")
    p.add_argument("--stats-b", default="22.80,8.33,25.80", help="mean,var,max or stats JSON")
    p.add_argument("--demands-a", default=None, help="predictions or series CSV of actual LTE demand")
    p.add_argument("--demands-b", default=None, help="predictions or series CSV of actual NR demand")
    p.add_argument("--continuous", action="store_true", help="real-valued allocations")
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("simulate", parents=[common], help="replay the RIC control loop")
    p.add_argument("--lte", default=None)
    p.add_argument("--nr", default=None)
    p.add_argument("--grid", default="lte_hour", help="model grid (LTE, and NR unless --grid-nr)")
    p.add_argument("--grid-nr", default=None, help="separate model grid for NR")
    p.add_argument("--statistical-only", action="store_true")
    p.add_argument("--pool", type=float, default=40.0)
    p.add_argument("--gamma", type=float, default=0.5)
    p.add_argument("--variant", choices=("max", "avg", "autofairest"), default="autofairest")
    p.add_argument("--retrain-every", type=int, default=168)
    p.add_argument("--allocate-every", type=int, default=24)
    p.add_argument("--warmup", type=int, default=100)
    p.add_argument("--train-fraction", type=float, default=0.66)
    p.add_argument("--continuous", action="store_true")
    p.add_argument("--observed-stats", action="store_true")
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("report", parents=[common], help="summarise a transcript or compare two series")
    p.add_argument("--transcript", default=None)
    p.add_argument("--series-a", default=None)
    p.add_argument("--series-b", default=None)
    p.add_argument("--bins", type=int, default=50)
    p.set_defaults(func=cmd_report)
    return ap


def _config_path(argv):
    for i, a in enumerate(argv):
        if a == "--config" and i + 1 < len(argv):
            return argv[i + 1]
        if a.startswith("--config="):
            return a.split("=", 1)[1]
    return None


def _apply_config(parser, argv):
    path = _config_path(argv)
    if not path:
        return
    try:
        cfg = json.loads(Path(path).read_text(encoding="utf-8"))
    except (OSError, json.JSONDecodeError) as exc:
        raise UsageError(f"cannot read --config: {exc}") from None
    if not isinstance(cfg, dict):
        raise UsageError("--config must hold a JSON object")
    cfg = {k.replace("-", "_"): v for k, v in cfg.items()}
    parser.set_defaults(**{k: v for k, v in cfg.items() if k in ("seed", "out")})
    for action in parser._subparsers._group_actions:
        for sp in action.choices.values():
            sp.set_defaults(**cfg)


def main(argv=None) -> int:
    parser = build_parser()
    argv = list(sys.argv[1:] if argv is None else argv)
    try:
        _apply_config(parser, argv)
    except UsageError as exc:
        print(f"prbshare: error: {exc}", file=sys.stderr)
        return 2
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    args.seed_given = args.seed is not None
    if args.seed is None:
        args.seed = 0
    Path(args.out).mkdir(parents=True, exist_ok=True)
    try:
        inputs, outputs = args.func(args)
        delattr(args, "seed_given")
        write_manifest(args, inputs, outputs)
    except UsageError as exc:
        print(f"prbshare {args.command}: error: {exc}", file=sys.stderr)
        return 2
    except VALIDATION_ERRORS as exc:
        print(f"prbshare {args.command}: error: {exc}", file=sys.stderr)
        return 2
    except Exception as exc:  # noqa: BLE001
        log.debug("failure", exc_info=True)
        print(f"prbshare {args.command}: failed: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
