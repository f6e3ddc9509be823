"""Render bar charts and sparsity spy images from coplanar-ba output files.

Inputs are the documented file interfaces of the benchmark CLI:

- ``summary.csv`` / ``runs.csv``: an optional ``# config=...`` provenance
  line, then a header row, then data rows.
- ``hessian_<variant>.txt``: a ``rows cols`` header line followed by one
  ``row col`` line per structurally nonzero scalar.

Rendering is a pure function of the input files: fixed figure geometry, no
timestamps in the PNG metadata. Every image gets a ``.json`` sidecar whose
values are copied verbatim (as strings) from the source file so they can be
byte-compared against it.
"""

from __future__ import annotations

import argparse
import csv
import json
import sys
from pathlib import Path
from typing import Dict, List, Tuple

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
from PIL import Image


class SchemaError(ValueError):
    """An input file does not match the documented schema."""


SUMMARY_COLUMNS = [
    "variant", "median_rmse_m", "median_opt_time_s",
    "items", "parameters", "runs", "failures",
]
RUNS_COLUMNS = [
    "variant", "seed", "rmse_m", "opt_time_s",
    "items", "parameters", "iterations", "converged",
]

# PNG writers normally stamp a Software field; suppress it so identical
# inputs produce byte-identical images.
_PNG_METADATA = {"Software": None}


def _read_csv(path: Path, expected_columns: List[str]) -> Tuple[str, List[Dict[str, str]]]:
    """Return (provenance line, rows). Raises SchemaError naming the first
    offending column on any mismatch."""
    if not path.exists():
        raise SchemaError(f"{path}: file not found")
    provenance = ""
    with open(path, newline="") as fh:
        first = fh.readline()
        if first.startswith("#"):
            provenance = first.strip()
        else:
            fh.seek(0)
        reader = csv.DictReader(fh)
        header = reader.fieldnames or []
        for col in expected_columns:
            if col not in header:
                raise SchemaError(f"{path}: missing column '{col}'")
        for col in header:
            if col not in expected_columns:
                raise SchemaError(f"{path}: unexpected column '{col}'")
        rows = list(reader)
    if not rows:
        raise SchemaError(f"{path}: no data rows")
    for row in rows:
        for col in ("median_rmse_m", "median_opt_time_s", "rmse_m", "opt_time_s"):
            if col in row:
                try:
                    float(row[col])
                except ValueError:
                    raise SchemaError(f"{path}: non-numeric value in column '{col}'")
    return provenance, rows


def _config_hash(provenance: str) -> str:
    for token in provenance.split():
        if token.startswith("hash="):
            return token[len("hash="):]
    return ""


def _bar_chart(variants: List[str], values: List[float], labels: List[str],
               ylabel: str, title: str, out_path: Path) -> None:
    fig, ax = plt.subplots(figsize=(6.0, 3.6), dpi=120)
    x = range(len(variants))
    ax.bar(x, values, color="#4878a8", width=0.6)
    ax.set_xticks(list(x))
    ax.set_xticklabels(variants)
    ax.set_ylabel(ylabel)
    ax.set_title(title, fontsize=10)
    for xi, value, label in zip(x, values, labels):
        ax.annotate(label, (xi, value), ha="center", va="bottom", fontsize=8)
    fig.tight_layout()
    fig.savefig(out_path, metadata=_PNG_METADATA)
    plt.close(fig)


def render_bench(summary_csv: Path, runs_csv: Path, out_dir: Path) -> List[Path]:
    """Render one bar chart per metric (optimization time, ATE RMSE) from
    the benchmark CSVs. Returns the written image paths.

    runs.csv is validated alongside summary.csv so a chart is never produced
    from a summary whose underlying runs are missing or malformed.
    """
    summary_csv, runs_csv, out_dir = Path(summary_csv), Path(runs_csv), Path(out_dir)
    provenance, summary_rows = _read_csv(summary_csv, SUMMARY_COLUMNS)
    _read_csv(runs_csv, RUNS_COLUMNS)
    out_dir.mkdir(parents=True, exist_ok=True)

    variants = [row["variant"] for row in summary_rows]
    hash_tag = _config_hash(provenance)
    suffix = f" [{hash_tag}]" if hash_tag else ""
    written: List[Path] = []
    for column, fname, ylabel, title in (
        ("median_opt_time_s", "bench_time.png", "median optimization time [s]",
         "Optimization time per variant" + suffix),
        ("median_rmse_m", "bench_rmse.png", "median ATE RMSE [m]",
         "Trajectory error per variant" + suffix),
    ):
        raw = [row[column] for row in summary_rows]
        png = out_dir / fname
        _bar_chart(variants, [float(v) for v in raw], raw, ylabel, title, png)
        sidecar = {
            "source": summary_csv.name,
            "provenance": provenance,
            "metric": column,
            "values": {v: r for v, r in zip(variants, raw)},
        }
        png.with_suffix(".json").write_text(json.dumps(sidecar, indent=2) + "\n")
        written.append(png)
    return written


def render_spy(pattern_path: Path, out_png: Path) -> Path:
    """Render a Hessian pattern file as a black/white image, one pixel per
    scalar: black where the pattern declares a nonzero, white elsewhere."""
    pattern_path, out_png = Path(pattern_path), Path(out_png)
    if not pattern_path.exists():
        raise SchemaError(f"{pattern_path}: file not found")
    lines = pattern_path.read_text().splitlines()
    if not lines:
        raise SchemaError(f"{pattern_path}: empty file")
    header = lines[0].strip()
    try:
        rows, cols = (int(tok) for tok in header.split())
    except ValueError:
        raise SchemaError(f"{pattern_path}: malformed header '{header}'")
    if rows <= 0 or cols <= 0:
        raise SchemaError(f"{pattern_path}: non-positive dimensions in header")

    image = Image.new("1", (cols, rows), 1)
    pixels = image.load()
    n_entries = 0
    for lineno, line in enumerate(lines[1:], start=2):
        if not line.strip():
            continue
        try:
            r, c = (int(tok) for tok in line.split())
        except ValueError:
            raise SchemaError(f"{pattern_path}:{lineno}: malformed entry '{line}'")
        if not (0 <= r < rows and 0 <= c < cols):
            raise SchemaError(
                f"{pattern_path}:{lineno}: entry ({r}, {c}) outside "
                f"declared {rows}x{cols} pattern")
        pixels[c, r] = 0
        n_entries += 1

    out_png.parent.mkdir(parents=True, exist_ok=True)
    image.save(out_png)
    sidecar = {
        "source": pattern_path.name,
        "header": header,
        "entries": n_entries,
    }
    out_png.with_suffix(".json").write_text(json.dumps(sidecar, indent=2) + "\n")
    return out_png


def bench_main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        description="Render benchmark bar charts from summary.csv / runs.csv.")
    parser.add_argument("summary_csv", type=Path)
    parser.add_argument("runs_csv", type=Path)
    parser.add_argument("--out", type=Path, default=Path("."))
    args = parser.parse_args(argv)
    try:
        for path in render_bench(args.summary_csv, args.runs_csv, args.out):
            print(path)
    except SchemaError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    return 0


def spy_main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        description="Render a Hessian sparsity pattern file as a spy image.")
    parser.add_argument("pattern", type=Path)
    parser.add_argument("--out", type=Path, default=None)
    args = parser.parse_args(argv)
    out = args.out or args.pattern.with_suffix(".png")
    try:
        print(render_spy(args.pattern, out))
    except SchemaError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    return 0


if __name__ == "__main__":
    sys.exit(bench_main())
