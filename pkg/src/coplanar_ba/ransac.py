"""Co-planar feature detection: RANSAC plane fitting over candidate point
and line sets, plus incremental landmark-to-plane association.

A line is accepted only when both endpoints pass the distance gate.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Dict, List, Optional, Tuple

import numpy as np

from .geometry import Plane


@dataclass
class PlanarCandidateSet:
    region_id: int
    points: Dict[int, np.ndarray] = field(default_factory=dict)
    lines: Dict[int, Tuple[np.ndarray, np.ndarray]] = field(default_factory=dict)

    def feature_count(self) -> int:
        return len(self.points) + len(self.lines)


@dataclass(frozen=True)
class RansacConfig:
    inlier_distance: float = 0.05
    consensus_fraction: float = 0.8
    max_iterations: int = 200
    min_features: int = 10
    rng_seed: int = 0

    def __post_init__(self):
        if not (0.0 < self.consensus_fraction <= 1.0):
            raise ValueError("consensus fraction must be in (0, 1]")
        if self.inlier_distance <= 0:
            raise ValueError("inlier distance must be positive")


@dataclass
class PlaneAssociation:
    plane: Plane
    inlier_points: List[int] = field(default_factory=list)
    inlier_lines: List[int] = field(default_factory=list)


def feature_plane_distance(feature, plane: Plane) -> float:
    """Perpendicular distance rule: |n.P + d| for points, max over the two
    endpoints for lines."""
    feature = np.asarray(feature, dtype=float)
    if feature.ndim == 1:
        return plane.distance(feature)
    return max(plane.distance(feature[0]), plane.distance(feature[1]))


def fit_plane_total_least_squares(points: np.ndarray) -> Plane:
    """Best plane through a point cloud: smallest eigenvector of the
    centered scatter matrix."""
    pts = np.asarray(points, dtype=float)
    centroid = pts.mean(axis=0)
    centered = pts - centroid
    _, _, vt = np.linalg.svd(centered, full_matrices=False)
    normal = vt[-1]
    return Plane(normal, -float(normal @ centroid))


def gate_region(candidates: PlanarCandidateSet, min_features: int) -> bool:
    return candidates.feature_count() >= min_features


def _sample_pool(candidates: PlanarCandidateSet) -> np.ndarray:
    pool = list(candidates.points.values())
    for s, e in candidates.lines.values():
        pool.append(np.asarray(s, dtype=float))
        pool.append(np.asarray(e, dtype=float))
    return np.asarray(pool, dtype=float)


def _classify(candidates: PlanarCandidateSet, plane: Plane, tol: float):
    pt_in = [i for i, p in candidates.points.items() if plane.distance(p) < tol]
    ln_in = [j for j, (s, e) in candidates.lines.items()
             if plane.distance(s) < tol and plane.distance(e) < tol]
    return pt_in, ln_in


def fit_plane_ransac(candidates: PlanarCandidateSet,
                     cfg: RansacConfig) -> Optional[PlaneAssociation]:
    """Largest-consensus plane over the candidate set, or None when the
    consensus stays below the configured fraction."""
    pool = _sample_pool(candidates)
    n_candidates = candidates.feature_count()
    if len(pool) < 3 or n_candidates == 0:
        return None
    rng = np.random.default_rng(cfg.rng_seed)
    best_count = -1
    best = None
    for _ in range(cfg.max_iterations):
        idx = rng.choice(len(pool), size=3, replace=False)
        p0, p1, p2 = pool[idx]
        normal = np.cross(p1 - p0, p2 - p0)
        if np.linalg.norm(normal) < 1e-12:
            continue
        plane = Plane(normal, -float(normal @ p0) / np.linalg.norm(normal))
        pt_in, ln_in = _classify(candidates, plane, cfg.inlier_distance)
        count = len(pt_in) + len(ln_in)
        if count > best_count:
            best_count = count
            best = (pt_in, ln_in)
            if count == n_candidates:
                break
    if best is None or best_count < cfg.consensus_fraction * n_candidates:
        return None

    # least-squares refit over the consensus set, then reclassify so the
    # final inlier set is exactly the set passing the gate on the refit plane
    pt_in, ln_in = best
    support = [candidates.points[i] for i in pt_in]
    for j in ln_in:
        s, e = candidates.lines[j]
        support += [np.asarray(s, dtype=float), np.asarray(e, dtype=float)]
    refit = fit_plane_total_least_squares(np.asarray(support))
    pt_in, ln_in = _classify(candidates, refit, cfg.inlier_distance)
    if len(pt_in) + len(ln_in) < cfg.consensus_fraction * n_candidates:
        return None
    return PlaneAssociation(refit, sorted(pt_in), sorted(ln_in))


def associate_new_landmarks(assoc: PlaneAssociation, new_points: Dict,
                            new_lines: Dict, inlier_distance: float) -> PlaneAssociation:
    """Add new features passing the distance gate; idempotent."""
    points = list(assoc.inlier_points)
    lines = list(assoc.inlier_lines)
    for i, p in new_points.items():
        if i not in points and assoc.plane.distance(p) < inlier_distance:
            points.append(i)
    for j, (s, e) in new_lines.items():
        if j not in lines and (assoc.plane.distance(s) < inlier_distance
                               and assoc.plane.distance(e) < inlier_distance):
            lines.append(j)
    return PlaneAssociation(assoc.plane, sorted(points), sorted(lines))
