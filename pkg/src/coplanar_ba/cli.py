"""Command-line entry point: config -> simulation -> solve -> report files.

Subcommands: simulate, bench, hessian, ransac-demo. All CSV outputs carry a
'#'-prefixed provenance line naming the config hash and base seed.
"""

from __future__ import annotations

import argparse
import dataclasses
import hashlib
import json
import sys
from pathlib import Path

import numpy as np
import yaml

from .config import PRESETS, SceneConfig, load_config, save_config
from .ransac import PlanarCandidateSet
from .simulator import (
    ACCOUNTING_VARIANTS,
    DEFAULT_BENCH_VARIANTS,
    VARIANTS,
    build_problem,
    generate_scene,
    run_monte_carlo,
)
from .solver import count_items_parameters, hessian_pattern, write_pattern

RUNS_COLUMNS = ["variant", "seed", "rmse_m", "opt_time_s", "items",
                "parameters", "iterations", "converged"]
SUMMARY_COLUMNS = ["variant", "median_rmse_m", "median_opt_time_s", "items",
                   "parameters", "runs", "failures"]


def config_hash(cfg: SceneConfig) -> str:
    blob = yaml.safe_dump(cfg.to_dict(), sort_keys=True).encode()
    return hashlib.sha256(blob).hexdigest()[:12]


def _provenance(cfg: SceneConfig, seed: int) -> str:
    return f"# config={cfg.name} hash={config_hash(cfg)} seed={seed}\n"


def _resolve_config(args) -> SceneConfig:
    if args.config in PRESETS:
        cfg = PRESETS[args.config]()
    else:
        cfg = load_config(args.config)
    if args.seed is not None:
        cfg = dataclasses.replace(cfg, rng_seed=args.seed)
    return cfg


def _resolve_variants(args, default):
    if not args.variants:
        return list(default)
    requested = [v.strip() for v in args.variants.split(",") if v.strip()]
    unknown = [v for v in requested if v not in VARIANTS]
    if unknown:
        raise SystemExit(f"unknown variants: {', '.join(unknown)} "
                         f"(known: {', '.join(VARIANTS)})")
    return requested


def _fmt(value) -> str:
    if isinstance(value, bool):
        return str(value).lower()
    if isinstance(value, float):
        return f"{value:.6f}"
    return str(value)


def _write_rows(path: Path, columns, rows, cfg, seed, fmt):
    with open(path, "w") as fh:
        fh.write(_provenance(cfg, seed))
        if fmt == "csv":
            fh.write(",".join(columns) + "\n")
            for row in rows:
                fh.write(",".join(_fmt(row[c]) for c in columns) + "\n")
        else:
            for row in rows:
                fh.write(json.dumps({c: row[c] for c in columns}) + "\n")


def cmd_simulate(args) -> int:
    cfg = _resolve_config(args)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    gt, meas = generate_scene(cfg)
    save_config(cfg, out / "config.yaml")
    rows = [{
        "poses": len(gt.poses),
        "points": len(gt.points),
        "lines": len(gt.lines),
        "planes": len(gt.planes),
        "point_observations": sum(len(o) for o in meas.point_obs.values()),
        "line_observations": sum(len(o) for o in meas.line_obs.values()),
        "odometry_edges": len(meas.odometry),
    }]
    _write_rows(out / "scene.csv", list(rows[0]), rows, cfg, cfg.rng_seed, args.format)
    print(f"scene written to {out}")
    return 0


def cmd_bench(args) -> int:
    cfg = _resolve_config(args)
    default = ACCOUNTING_VARIANTS if args.include_accounting else DEFAULT_BENCH_VARIANTS
    variants = _resolve_variants(args, default)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)

    reports, summary = run_monte_carlo(cfg, variants, args.n_runs, jobs=args.jobs)
    ext = "csv" if args.format == "csv" else "jsonl"
    run_rows = [{
        "variant": r.variant, "seed": r.seed, "rmse_m": r.rmse_m,
        "opt_time_s": r.opt_time_s, "items": r.items, "parameters": r.parameters,
        "iterations": r.iterations, "converged": r.converged,
    } for r in reports]
    _write_rows(out / f"runs.{ext}", RUNS_COLUMNS, run_rows, cfg, cfg.rng_seed, args.format)

    summary_rows = [{
        "variant": vid, "median_rmse_m": s["median_rmse_m"],
        "median_opt_time_s": s["median_opt_time_s"], "items": s["items"],
        "parameters": s["parameters"], "runs": s["runs"], "failures": s["failures"],
    } for vid, s in ((v, summary[v]) for v in variants if v in summary)]
    _write_rows(out / f"summary.{ext}", SUMMARY_COLUMNS, summary_rows, cfg,
                cfg.rng_seed, args.format)
    for row in summary_rows:
        print(f"{row['variant']:>6}: median rmse {row['median_rmse_m']:.4f} m, "
              f"median opt time {row['median_opt_time_s'] * 1e3:.1f} ms, "
              f"items {row['items']}, parameters {row['parameters']}, "
              f"failures {row['failures']}")
    return 0


def cmd_hessian(args) -> int:
    cfg = _resolve_config(args)
    variants = _resolve_variants(args, ACCOUNTING_VARIANTS)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    gt, meas = generate_scene(cfg)
    for vid in variants:
        problem, _ = build_problem(gt, meas, VARIANTS[vid], cfg)
        pattern = hessian_pattern(problem)
        write_pattern(out / f"hessian_{vid}.txt", pattern)
        items, params = count_items_parameters(problem)
        print(f"{vid:>6}: {pattern.total_dim} rows, "
              f"{pattern.nonzero_scalars()} structural nonzeros "
              f"({items} items / {params} parameters)")
    return 0


def cmd_ransac_demo(args) -> int:
    cfg = _resolve_config(args)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    gt, meas = generate_scene(cfg)
    # -w build runs the detector; reuse its candidate sets and associations
    problem, info = build_problem(gt, meas, VARIANTS["PL-w"], cfg)
    rows = []
    for region, cand in info.candidates.items():
        assoc = info.associations.get(region)
        true_pts = set(gt.true_member_points(region))
        true_lns = set(gt.true_member_lines(region))
        if assoc is None:
            rows.append({"region": region, "accepted": False,
                         "nx": np.nan, "ny": np.nan, "nz": np.nan, "d": np.nan,
                         "inlier_points": 0, "inlier_lines": 0,
                         "candidates": cand.feature_count(),
                         "precision": np.nan, "recall": np.nan})
            continue
        got = set(assoc.inlier_points) | {("l", j) for j in assoc.inlier_lines}
        truth = true_pts | {("l", j) for j in true_lns}
        tp = len(got & truth)
        precision = tp / len(got) if got else np.nan
        recall = tp / len(truth) if truth else np.nan
        n = assoc.plane.normal
        rows.append({"region": region, "accepted": True,
                     "nx": n[0], "ny": n[1], "nz": n[2], "d": assoc.plane.offset,
                     "inlier_points": len(assoc.inlier_points),
                     "inlier_lines": len(assoc.inlier_lines),
                     "candidates": cand.feature_count(),
                     "precision": precision, "recall": recall})
    columns = ["region", "accepted", "nx", "ny", "nz", "d", "inlier_points",
               "inlier_lines", "candidates", "precision", "recall"]
    _write_rows(out / "ransac_report.csv", columns, rows, cfg, cfg.rng_seed, args.format)
    for row in rows:
        print(f"region {row['region']}: accepted={row['accepted']} "
              f"precision={row['precision']} recall={row['recall']}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="coplanar-ba",
        description="Co-planar bundle adjustment Monte-Carlo benchmark.")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p):
        p.add_argument("--config", default="sequence_b",
                       help="preset name (sequence_a, sequence_b) or YAML path")
        p.add_argument("--out", default="out", help="output directory")
        p.add_argument("--variants", default="",
                       help="comma-separated variant list (default depends on command)")
        p.add_argument("--n-runs", type=int, default=30)
        p.add_argument("--seed", type=int, default=None)
        p.add_argument("--jobs", type=int, default=1)
        p.add_argument("--format", choices=("csv", "jsonl"), default="csv")
        p.add_argument("--include-accounting", action="store_true",
                       help="also run PL-wo for the parameter-accounting table")

    for name, fn in (("simulate", cmd_simulate), ("bench", cmd_bench),
                     ("hessian", cmd_hessian), ("ransac-demo", cmd_ransac_demo)):
        p = sub.add_parser(name)
        common(p)
        p.set_defaults(fn=fn)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        cfg = args.config
        if cfg not in PRESETS and not Path(cfg).is_file():
            print(f"error: config {cfg!r} is neither a preset nor a file",
                  file=sys.stderr)
            return 2
        return args.fn(args)
    except (ValueError, yaml.YAMLError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    raise SystemExit(main())
