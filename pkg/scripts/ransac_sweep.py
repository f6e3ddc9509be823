#!/usr/bin/env python3
"""Contamination sweep for the plane-consensus detector: acceptance rate and
inlier precision as a function of the injected outlier fraction."""

import argparse
import sys

import numpy as np

from coplanar_ba.geometry import Plane, sphere_tangent_basis
from coplanar_ba.ransac import PlanarCandidateSet, RansacConfig, fit_plane_ransac


def run_fraction(fraction: float, n_features: int, n_seeds: int):
    plane = Plane([0.0, 0.0, 1.0], -2.0)
    B = sphere_tangent_basis(plane.normal)
    origin = -plane.offset * plane.normal
    n_out = int(round(fraction * n_features))
    n_in = n_features - n_out
    accepted = 0
    precisions = []
    for seed in range(n_seeds):
        rng = np.random.default_rng(seed)
        uv = rng.uniform(-3, 3, (n_features, 2))
        pts = origin + uv @ B.T
        pts[:n_in] += np.outer(rng.normal(0, 0.01, n_in), plane.normal)
        shifts = rng.uniform(1.0, 3.0, n_out) * rng.choice([-1.0, 1.0], n_out)
        pts[n_in:] += np.outer(shifts, plane.normal)
        cand = PlanarCandidateSet(0, points=dict(enumerate(pts)))
        assoc = fit_plane_ransac(cand, RansacConfig(rng_seed=seed))
        if assoc is None:
            continue
        accepted += 1
        got = set(assoc.inlier_points)
        precisions.append(len(got & set(range(n_in))) / len(got))
    return accepted, precisions


def main() -> int:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--features", type=int, default=100)
    parser.add_argument("--seeds", type=int, default=100)
    args = parser.parse_args()

    for fraction in (0.0, 0.1, 0.2, 0.3, 0.5):
        accepted, precisions = run_fraction(fraction, args.features, args.seeds)
        med = float(np.median(precisions)) if precisions else float("nan")
        print(f"outliers {fraction * 100:4.0f}%: accepted {accepted}/{args.seeds}, "
              f"median precision {med:.4f}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
