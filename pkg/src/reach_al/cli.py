"""Command-line interface.

Subcommands: gen-scene, label, run, sweep, envelope, plot, report.
Shared flags: --config, --seed, --out, --strict, --jobs.  The default
output directory comes from $REACH_AL_OUT, falling back to ./out.
"""

from __future__ import annotations

import argparse
import logging
import os
import sys
from dataclasses import replace

import numpy as np

from . import report as report_mod
from .config import default_config, load_config, resolve_out_dir
from .dataset import (
    generate_scene,
    ingest_detections,
    label_with_oracle,
    read_labeled_cache,
    write_detections,
    write_labeled_cache,
)
from .errors import ReachALError
from .kinematics import sample_envelope, write_envelope, read_envelope
from .report import ExperimentGrid, run_grid

logger = logging.getLogger(__name__)


def _add_common(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--config", help="experiment config file (key = value lines)")
    parser.add_argument("--seed", type=int, help="override the subcommand's primary seed")
    parser.add_argument("--out", help="output directory (default: $REACH_AL_OUT or ./out)")
    parser.add_argument("--strict", action="store_true", help="fail on per-cell errors")
    parser.add_argument("--jobs", type=int, default=1, help="parallel workers for sweeps")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="reach-al",
        description="Learn decision-level fruit reachability with active learning.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("gen-scene", help="generate synthetic detections")
    _add_common(p)
    p.add_argument("--detections", default="detections.csv", help="output file name")

    p = sub.add_parser("label", help="label a detection file with the IK oracle")
    _add_common(p)
    p.add_argument("--detections", required=True, help="detection file to ingest")
    p.add_argument("--labeled", default="labeled.csv", help="output cache file name")

    p = sub.add_parser("run", help="run one active-learning cell")
    _add_common(p)
    p.add_argument("--strategy", help="override al.strategy")
    p.add_argument("--init-size", type=int, help="override al.init_size")
    p.add_argument("--budget", type=int, help="override al.n_queries")
    p.add_argument("--data", help="labeled cache for the sample set (default: synthetic)")
    p.add_argument("--pool", help="labeled cache for the candidate pool")

    p = sub.add_parser("sweep", help="run the full experiment grid")
    _add_common(p)

    p = sub.add_parser("envelope", help="sample the reachable envelope to a text file")
    _add_common(p)
    p.add_argument("--steps", type=int, default=20, help="grid steps per joint")
    p.add_argument("--envelope", default="envelope.xyz", help="output file name")

    p = sub.add_parser("plot", help="emit SVG plots from results or envelope data")
    _add_common(p)
    p.add_argument("--kind", choices=("curves", "envelope"), required=True)
    p.add_argument("--results", help="results.csv (kind=curves)")
    p.add_argument("--envelope", help="envelope .xyz file (kind=envelope)")
    p.add_argument("--labeled", help="labeled cache overlaid on envelope views")

    p = sub.add_parser("report", help="print a summary table from a results file")
    _add_common(p)
    p.add_argument("--results", required=True, help="results.csv to summarize")

    return parser


def _load(args) -> "AppConfig":
    cfg = load_config(args.config) if args.config else default_config()
    if args.seed is not None:
        cfg.scene = replace(cfg.scene, seed=args.seed)
        cfg.al = replace(cfg.al, seed=args.seed)
    return cfg


def _cmd_gen_scene(args) -> int:
    cfg = _load(args)
    out_dir = resolve_out_dir(args.out)
    os.makedirs(out_dir, exist_ok=True)
    records = generate_scene(cfg.scene, cfg.cam)
    path = os.path.join(out_dir, args.detections)
    write_detections(path, records)
    print(f"wrote {len(records)} detections to {path}")
    return 0


def _cmd_label(args) -> int:
    cfg = _load(args)
    out_dir = resolve_out_dir(args.out)
    os.makedirs(out_dir, exist_ok=True)
    records = ingest_detections(args.detections, cfg.cam)
    result = label_with_oracle(
        records, cfg.cam, cfg.ext, cfg.arm, density_band=cfg.features.density_band
    )
    path = os.path.join(out_dir, args.labeled)
    write_labeled_cache(path, result)
    meta_path = path + ".meta"
    with open(meta_path, "w") as fh:
        fh.write(f"n_input = {result.n_input}\n")
        fh.write(f"n_dropped = {result.n_dropped}\n")
        fh.write(f"n_labeled = {len(result.samples)}\n")
        density_source = "patch5x5" if result.patch_density_fallback else "window11x11"
        fh.write(f"density_source = {density_source}\n")
    reachable = sum(s.label for s in result.samples)
    print(
        f"labeled {len(result.samples)} records ({reachable} reachable, "
        f"{result.n_dropped} dropped) -> {path}"
    )
    return 0


def _cmd_run(args) -> int:
    cfg = _load(args)
    out_dir = resolve_out_dir(args.out)
    os.makedirs(out_dir, exist_ok=True)
    al = cfg.al
    if args.strategy:
        al = replace(al, strategy=args.strategy)
    if args.init_size is not None:
        al = replace(al, init_size=args.init_size)
    if args.budget is not None:
        al = replace(al, n_queries=args.budget)
    cfg.al = al

    grid = ExperimentGrid.from_config(cfg)
    grid.strategies = (al.strategy,)
    grid.init_sizes = (al.init_size,)
    grid.budgets = (al.n_queries,)
    grid.seeds = (al.seed,)

    if args.data:
        samples = read_labeled_cache(args.data).samples
        if len(samples) < cfg.data.n_samples:
            logger.warning(
                "labeled cache has %d samples, fewer than data.n_samples=%d",
                len(samples),
                cfg.data.n_samples,
            )
        sample_set = samples[: cfg.data.n_samples]
        candidates = (
            read_labeled_cache(args.pool).samples
            if args.pool
            else samples[cfg.data.n_samples :]
        )
        rows = report_mod.run_cell(
            sample_set, candidates, grid, al.strategy, al.init_size, al.n_queries, al.seed
        )
        results_path = os.path.join(out_dir, "results.csv")
        report_mod.write_results(results_path, rows)
        summary = report_mod.summarize(rows)
        report_mod.write_summary(os.path.join(out_dir, "summary.csv"), summary)
        errors = []
    else:
        results_path, _, errors = run_grid(
            grid, out_dir, jobs=args.jobs, strict=args.strict
        )
    rows = report_mod.read_results(results_path)
    final = max((r for r in rows if r.round >= 0), key=lambda r: r.round, default=None)
    if final is not None:
        print(
            f"{al.strategy}: n_labeled={final.n_labeled} accuracy={final.accuracy:.4f} "
            f"auc={final.auc if final.auc is None else round(final.auc, 4)} "
            f"ik_reduction={final.ik_reduction:.4f}"
        )
    print(f"results -> {results_path}")
    if errors and args.strict:
        return 1
    return 0


def _cmd_sweep(args) -> int:
    cfg = _load(args)
    out_dir = resolve_out_dir(args.out)
    grid = ExperimentGrid.from_config(cfg)
    results_path, summary_path, errors = run_grid(
        grid, out_dir, jobs=args.jobs, strict=args.strict
    )
    print(f"results -> {results_path}")
    print(f"summary -> {summary_path}")
    if errors:
        print(f"{len(errors)} cell(s) failed", file=sys.stderr)
        if args.strict:
            return 1
    return 0


def _cmd_envelope(args) -> int:
    cfg = _load(args)
    out_dir = resolve_out_dir(args.out)
    os.makedirs(out_dir, exist_ok=True)
    pts = sample_envelope(cfg.arm, steps_per_joint=args.steps)
    path = os.path.join(out_dir, args.envelope)
    write_envelope(path, pts)
    print(f"wrote {len(pts)} envelope points to {path}")
    return 0


def _cmd_plot(args) -> int:
    out_dir = resolve_out_dir(args.out)
    if args.kind == "curves":
        if not args.results:
            raise ReachALError("--results is required for --kind curves")
        written = report_mod.emit_curve_plots(args.results, out_dir)
    else:
        if not args.envelope:
            raise ReachALError("--envelope is required for --kind envelope")
        env = read_envelope(args.envelope)
        fruit = labels = None
        if args.labeled:
            cache = read_labeled_cache(args.labeled)
            fruit = np.array([s.arm_point.as_array() for s in cache.samples])
            labels = np.array([s.label for s in cache.samples])
        written = report_mod.emit_envelope_plots(env, out_dir, fruit, labels)
    for path in written:
        print(f"wrote {path}")
    return 0


def _cmd_report(args) -> int:
    rows = report_mod.read_results(args.results)
    summary = report_mod.summarize(rows)
    print(report_mod.format_summary_table(summary))
    return 0


_COMMANDS = {
    "gen-scene": _cmd_gen_scene,
    "label": _cmd_label,
    "run": _cmd_run,
    "sweep": _cmd_sweep,
    "envelope": _cmd_envelope,
    "plot": _cmd_plot,
    "report": _cmd_report,
}


def main(argv=None) -> int:
    logging.basicConfig(level=logging.INFO, format="%(levelname)s %(name)s: %(message)s")
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return _COMMANDS[args.command](args)
    except ReachALError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
