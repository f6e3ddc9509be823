#!/usr/bin/env python3
"""Export Hessian sparsity patterns for every variant and print the
dimension / nonzero comparison between the traditional and co-planar
parametrizations."""

import argparse
import sys

from coplanar_ba.cli import main as cli_main
from coplanar_ba.solver import read_pattern


def main() -> int:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--config", default="sequence_b")
    parser.add_argument("--out", default="out/hessian")
    parser.add_argument("--seed", type=int, default=0)
    args = parser.parse_args()

    rc = cli_main(["hessian", "--config", args.config, "--out", args.out,
                   "--seed", str(args.seed)])
    if rc != 0:
        return rc
    from pathlib import Path
    for path in sorted(Path(args.out).glob("hessian_*.txt")):
        (rows, _), entries = read_pattern(path)
        fill = len(entries) / max(rows * rows, 1)
        print(f"{path.name}: {rows}x{rows}, {len(entries)} nonzeros "
              f"({fill * 100:.1f}% fill)")
    return 0


if __name__ == "__main__":
    sys.exit(main())
