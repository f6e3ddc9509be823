"""Monte-Carlo benchmark: synthetic co-planar scenes, noisy measurements,
problem assembly for each parametrization variant, and trajectory scoring.

Variant naming follows the benchmark convention: P = points only,
PL = points + lines; -wo = traditional parametrization, -r = plane-distance
residuals on top of it, -w = co-planar reparametrization (landmarks carry no
own parameters, the shared plane block does).
"""

from __future__ import annotations

import dataclasses
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Tuple

import numpy as np

from .config import SceneConfig
from .geometry import (
    Plane,
    PluckerLine,
    Pose,
    backproject,
    plucker_to_orthonormal,
    pose_boxminus,
    project,
    quat_multiply,
    quat_normalize,
)
from .parametrization import (
    CoPlanarLine,
    CoPlanarPoint,
    InverseDepthPoint,
    LowParallaxError,
    backprojection_plane,
    triangulate_line,
    triangulate_point,
)
from .ransac import PlanarCandidateSet, PlaneAssociation, RansacConfig, fit_plane_ransac, gate_region
from .residuals import (
    LinePlaneEdge,
    LineReprojEdge,
    OdometryEdge,
    PointPlaneEdge,
    PointReprojEdge,
    PosePriorEdge,
    RobustLoss,
)
from .solver import Problem, count_items_parameters, optimize


class SceneGenerationError(RuntimeError):
    """Feature placement could not satisfy visibility after bounded retries."""


@dataclass(frozen=True)
class VariantSpec:
    id: str
    uses_lines: bool
    coplanar_mode: str  # "none" | "residual" | "reparam"


VARIANTS = {
    "P-wo": VariantSpec("P-wo", False, "none"),
    "P-r": VariantSpec("P-r", False, "residual"),
    "P-w": VariantSpec("P-w", False, "reparam"),
    "PL-wo": VariantSpec("PL-wo", True, "none"),
    "PL-r": VariantSpec("PL-r", True, "residual"),
    "PL-w": VariantSpec("PL-w", True, "reparam"),
}

# the five formulations benchmarked head to head; PL-wo is kept for the
# parameter-accounting table
DEFAULT_BENCH_VARIANTS = ["P-wo", "P-r", "P-w", "PL-r", "PL-w"]
ACCOUNTING_VARIANTS = ["P-wo", "P-r", "P-w", "PL-wo", "PL-r", "PL-w"]


@dataclass
class GroundTruth:
    poses: List[Pose]
    points: Dict[int, np.ndarray]
    lines: Dict[int, Tuple[np.ndarray, np.ndarray]]
    planes: List[Plane]
    region_points: Dict[int, List[int]]   # region -> candidate point ids
    region_lines: Dict[int, List[int]]
    outlier_points: set = field(default_factory=set)
    outlier_lines: set = field(default_factory=set)

    def true_member_points(self, region: int) -> List[int]:
        return [i for i in self.region_points[region] if i not in self.outlier_points]

    def true_member_lines(self, region: int) -> List[int]:
        return [j for j in self.region_lines[region] if j not in self.outlier_lines]


@dataclass
class MeasurementSet:
    point_obs: Dict[int, List[Tuple[int, np.ndarray]]]
    line_obs: Dict[int, List[Tuple[int, Tuple[np.ndarray, np.ndarray]]]]
    odometry: List[Pose]


# ---------------------------------------------------------------------------
# Scene generation
# ---------------------------------------------------------------------------

_R_WALL = np.array([[1.0, 0.0, 0.0],
                    [0.0, 0.0, 1.0],
                    [0.0, -1.0, 0.0]])  # optical axis +y, image up = world +z
_R_FORWARD = np.array([[0.0, 0.0, 1.0],
                       [-1.0, 0.0, 0.0],
                       [0.0, -1.0, 0.0]])  # optical axis +x


def _trajectory(cfg: SceneConfig) -> List[Pose]:
    R = _R_WALL if cfg.camera_orientation == "wall" else _R_FORWARD
    poses = []
    for i in range(cfg.n_poses):
        x = cfg.trajectory_length * i / max(cfg.n_poses - 1, 1)
        z = cfg.trajectory_amplitude * np.sin(2.0 * np.pi * x / cfg.trajectory_period)
        poses.append(Pose.from_rt(R, np.array([x, 0.0, z])))
    return poses


def _wall_plane(wall) -> Plane:
    n = np.array([0.0, 1.0, 0.0]) if wall.axis == "y" else np.array([0.0, 0.0, 1.0])
    return Plane(n, -wall.offset)


def _wall_point(wall, rng) -> np.ndarray:
    u = rng.uniform(*wall.u_range)
    v = rng.uniform(*wall.v_range)
    if wall.axis == "y":
        return np.array([u, wall.offset, v])
    return np.array([u, v, wall.offset])


def _wall_point_outside(wall, p) -> bool:
    u = p[0]
    v = p[2] if wall.axis == "y" else p[1]
    return not (wall.u_range[0] <= u <= wall.u_range[1]
                and wall.v_range[0] <= v <= wall.v_range[1])


def _visible(point, pose: Pose, cfg: SceneConfig) -> Optional[np.ndarray]:
    p_cam = pose.inverse().transform(point)
    if p_cam[2] < cfg.min_depth:
        return None
    px = project(cfg.intrinsics, p_cam)
    if 0.0 <= px[0] <= cfg.image_width and 0.0 <= px[1] <= cfg.image_height:
        return px
    return None


def generate_scene(cfg: SceneConfig) -> Tuple[GroundTruth, MeasurementSet]:
    """Deterministic scene + noisy measurements from the config seed."""
    rng = np.random.default_rng(cfg.rng_seed)
    poses = _trajectory(cfg)
    planes = [_wall_plane(w) for w in cfg.walls]
    points: Dict[int, np.ndarray] = {}
    lines: Dict[int, Tuple[np.ndarray, np.ndarray]] = {}
    region_points = {k: [] for k in range(len(cfg.walls))}
    region_lines = {k: [] for k in range(len(cfg.walls))}
    point_obs: Dict[int, list] = {}
    line_obs: Dict[int, list] = {}

    def observers_point(p):
        return [(k, px) for k, pose in enumerate(poses)
                if (px := _visible(p, pose, cfg)) is not None]

    min_obs = max(2, cfg.min_observations)
    for i in range(cfg.n_points):
        region = i % len(cfg.walls)
        for _ in range(500):
            p = _wall_point(cfg.walls[region], rng)
            obs = observers_point(p)
            if len(obs) >= min_obs:
                break
        else:
            raise SceneGenerationError(
                f"point {i}: no placement visible from {min_obs} poses")
        points[i] = p
        region_points[region].append(i)
        point_obs[i] = obs

    for j in range(cfg.n_lines):
        region = j % len(cfg.walls)
        wall = cfg.walls[region]
        for _ in range(500):
            p1 = _wall_point(wall, rng)
            direction = rng.normal(size=3)
            direction -= (direction @ planes[region].normal) * planes[region].normal
            if np.linalg.norm(direction) < 1e-6:
                continue
            direction /= np.linalg.norm(direction)
            p2 = p1 + rng.uniform(0.5, cfg.max_line_length) * direction
            if _wall_point_outside(wall, p2):
                continue
            obs = []
            for k, pose in enumerate(poses):
                px1 = _visible(p1, pose, cfg)
                px2 = _visible(p2, pose, cfg)
                if px1 is not None and px2 is not None:
                    obs.append((k, (px1, px2)))
            if len(obs) >= min_obs:
                break
        else:
            raise SceneGenerationError(
                f"line {j}: no placement visible from {min_obs} poses")
        lines[j] = (p1, p2)
        region_lines[region].append(j)
        line_obs[j] = obs

    # injected off-plane outliers (stand-in for segmentation noise); features
    # stay in their region's candidate list but leave the true plane
    outlier_points, outlier_lines = set(), set()
    if cfg.outlier_fraction > 0:
        gap = 10.0 * cfg.ransac.inlier_distance
        for i in list(points):
            if rng.uniform() < cfg.outlier_fraction:
                region = i % len(cfg.walls)
                n = planes[region].normal
                shift = (gap + 10.0 * cfg.ransac.inlier_distance * rng.uniform()) \
                    * (1.0 if rng.uniform() < 0.5 else -1.0)
                points[i] = points[i] + shift * n
                outlier_points.add(i)
                point_obs[i] = observers_point(points[i])
                if len(point_obs[i]) < 2:
                    # keep the displaced feature but require two views
                    points[i] = points[i] - 2 * shift * n
                    point_obs[i] = observers_point(points[i])
        for j in list(lines):
            if rng.uniform() < cfg.outlier_fraction:
                region = j % len(cfg.walls)
                n = planes[region].normal
                shift = (gap + 10.0 * cfg.ransac.inlier_distance * rng.uniform())
                p1, p2 = lines[j]
                lines[j] = (p1 + shift * n, p2 + shift * n)
                outlier_lines.add(j)
                obs = []
                for k, pose in enumerate(poses):
                    px1 = _visible(lines[j][0], pose, cfg)
                    px2 = _visible(lines[j][1], pose, cfg)
                    if px1 is not None and px2 is not None:
                        obs.append((k, (px1, px2)))
                if len(obs) >= 2:
                    line_obs[j] = obs
                else:
                    lines[j] = (p1, p2)
                    outlier_lines.discard(j)

    # measurement noise
    sig = cfg.pixel_noise_sigma
    for i, obs in point_obs.items():
        point_obs[i] = [(k, px + rng.normal(0.0, sig, 2) if sig > 0 else px)
                        for k, px in obs]
    for j, obs in line_obs.items():
        line_obs[j] = [
            (k, (s + rng.normal(0.0, sig, 2) if sig > 0 else s,
                 e + rng.normal(0.0, sig, 2) if sig > 0 else e))
            for k, (s, e) in obs
        ]

    # relative-pose odometry with Gaussian white noise on rotation/translation
    sigma_theta = np.deg2rad(cfg.odom_sigma_theta_deg)
    odometry = []
    for k in range(cfg.n_poses - 1):
        rel = poses[k].inverse().compose(poses[k + 1])
        q, t = rel.quaternion, rel.translation
        if sigma_theta > 0:
            n_theta = rng.normal(0.0, sigma_theta, 3)
            q_noise = quat_normalize(np.array([1.0, *(0.5 * n_theta)]))
            q = quat_multiply(q_noise, q)
        if cfg.odom_sigma_p > 0:
            t = t + rng.normal(0.0, cfg.odom_sigma_p, 3)
        odometry.append(Pose(q, t))

    gt = GroundTruth(poses, points, lines, planes, region_points, region_lines,
                     outlier_points, outlier_lines)
    return gt, MeasurementSet(point_obs, line_obs, odometry)


# ---------------------------------------------------------------------------
# Problem assembly per variant
# ---------------------------------------------------------------------------

def _closest_point_on_line_to_ray(line: PluckerLine, origin, direction) -> np.ndarray:
    """Point on `line` nearest to the ray (origin, direction)."""
    p0 = line.closest_point_to_origin()
    d1 = line.direction / np.linalg.norm(line.direction)
    d2 = np.asarray(direction, dtype=float)
    d2 = d2 / np.linalg.norm(d2)
    w = p0 - np.asarray(origin, dtype=float)
    a = float(d1 @ d2)
    denom = 1.0 - a * a
    if denom < 1e-12:
        return p0
    s = (-(w @ d1) + a * (w @ d2)) / denom
    return p0 + s * d1


def _best_line_pair(obs, init_poses, K):
    """Observation pair whose back-projection planes have the largest angle."""
    planes = []
    for k, (s, e) in obs:
        planes.append((k, (s, e), backprojection_plane(init_poses[k], K, (s, e))))
    best, best_sin = None, -1.0
    for ii in range(len(planes)):
        for jj in range(ii + 1, len(planes)):
            sin = np.linalg.norm(np.cross(planes[ii][2].normal, planes[jj][2].normal))
            if sin > best_sin:
                best_sin = sin
                best = (planes[ii], planes[jj])
    return best, best_sin


@dataclass
class BuildInfo:
    degraded_regions: int = 0
    dropped_lines: int = 0
    associations: Dict[int, PlaneAssociation] = field(default_factory=dict)
    candidates: Dict[int, PlanarCandidateSet] = field(default_factory=dict)


def integrate_odometry(first: Pose, odometry: List[Pose]) -> List[Pose]:
    poses = [first]
    for rel in odometry:
        poses.append(poses[-1].compose(rel))
    return poses


def build_problem(gt: GroundTruth, meas: MeasurementSet, variant: VariantSpec,
                  cfg: SceneConfig) -> Tuple[Problem, BuildInfo]:
    """Assemble the optimization problem for one parametrization variant.

    Initial poses come from integrating the noisy odometry; landmarks are
    triangulated from those poses and the noisy pixels. RANSAC failures
    degrade the affected region to the traditional parametrization.
    """
    K = cfg.intrinsics
    info = BuildInfo()
    init_poses = integrate_odometry(gt.poses[0], meas.odometry)

    state: Dict = {}
    for k, pose in enumerate(init_poses):
        state[("pose", k)] = pose

    # triangulate points from initial poses
    tri_points: Dict[int, np.ndarray] = {}
    anchor_of_point: Dict[int, Tuple[int, np.ndarray]] = {}
    fallback_depth = float(np.mean([abs(w.offset) for w in cfg.walls]))
    for i, obs in meas.point_obs.items():
        frames = [k for k, _ in obs]
        pixels = [px for _, px in obs]
        anchor_frame, anchor_px = obs[0]
        anchor_of_point[i] = (anchor_frame, anchor_px)
        try:
            p = triangulate_point(pixels, [init_poses[k] for k in frames], K)
            depth = init_poses[anchor_frame].inverse().transform(p)[2]
            if depth < cfg.min_depth:
                raise LowParallaxError("triangulated point behind anchor")
        except LowParallaxError:
            depth = fallback_depth
            p = init_poses[anchor_frame].transform(
                backproject(K, anchor_px) * depth)
        tri_points[i] = p

    # triangulate lines: endpoints correspond across views in this simulation,
    # so multi-view point triangulation of the endpoints is far more robust to
    # odometry drift than intersecting two back-projection planes
    tri_lines: Dict[int, PluckerLine] = {}
    anchor_of_line: Dict[int, Tuple[int, tuple]] = {}
    line_endpoints_3d: Dict[int, Tuple[np.ndarray, np.ndarray]] = {}
    for j, obs in (meas.line_obs.items() if variant.uses_lines else []):
        anchor_frame, anchor_eps = obs[0]
        anchor_of_line[j] = (anchor_frame, anchor_eps)
        frames = [k for k, _ in obs]
        obs_poses = [init_poses[k] for k in frames]
        try:
            e1 = triangulate_point([eps[0] for _, eps in obs], obs_poses, K)
            e2 = triangulate_point([eps[1] for _, eps in obs], obs_poses, K)
            line = PluckerLine.from_points(e1, e2)
        except LowParallaxError:
            # fall back to the two-plane intersection before giving up
            pair, _ = _best_line_pair(obs, init_poses, K)
            (ka, eps_a, _), (kb, eps_b, _) = pair
            try:
                line = triangulate_line(eps_a, init_poses[ka],
                                        eps_b, init_poses[kb], K)
            except LowParallaxError:
                info.dropped_lines += 1
                continue
            pose_a = init_poses[anchor_frame]
            e1, e2 = (
                _closest_point_on_line_to_ray(
                    line, pose_a.translation,
                    pose_a.rotation_matrix @ backproject(K, ep))
                for ep in anchor_eps
            )
        tri_lines[j] = line
        line_endpoints_3d[j] = (e1, e2)

    # co-planar detection (RANSAC over ground-truth regions with outliers)
    associations: Dict[int, PlaneAssociation] = {}
    if variant.coplanar_mode != "none":
        for region in gt.region_points:
            cand = PlanarCandidateSet(
                region,
                points={i: tri_points[i] for i in gt.region_points[region]
                        if i in tri_points},
                lines={j: line_endpoints_3d[j] for j in gt.region_lines[region]
                       if j in line_endpoints_3d} if variant.uses_lines else {},
            )
            info.candidates[region] = cand
            rcfg = RansacConfig(
                inlier_distance=cfg.ransac.inlier_distance,
                consensus_fraction=cfg.ransac.consensus_fraction,
                max_iterations=cfg.ransac.max_iterations,
                min_features=cfg.ransac.min_features,
                rng_seed=cfg.rng_seed + 7919 * (region + 1),
            )
            if not gate_region(cand, rcfg.min_features):
                info.degraded_regions += 1
                continue
            assoc = fit_plane_ransac(cand, rcfg)
            if assoc is None:
                info.degraded_regions += 1
                continue
            associations[region] = assoc
            info.associations[region] = assoc

    # landmark blocks
    def best_plane_anchor(obs, target, normal, ray_of):
        # a plane-anchored landmark sits at (anchor ray) x (plane), so its
        # sensitivity to anchor pixel noise scales with range / sin(incidence);
        # pick the observation that minimizes it
        best, best_score = obs[0], np.inf
        for k, m in obs:
            ray = init_poses[k].rotation_matrix @ ray_of(m)
            ray = ray / np.linalg.norm(ray)
            rng_k = np.linalg.norm(target - init_poses[k].translation)
            score = rng_k / max(abs(float(normal @ ray)), 1e-6)
            if score < best_score:
                best, best_score = (k, m), score
        return best

    for i in sorted(tri_points):
        anchor_frame, anchor_px = anchor_of_point[i]
        region = i % len(cfg.walls)
        assoc = associations.get(region)
        if (variant.coplanar_mode == "reparam" and assoc is not None
                and i in assoc.inlier_points):
            anchor_frame, anchor_px = best_plane_anchor(
                meas.point_obs[i], tri_points[i], assoc.plane.normal,
                lambda px: backproject(K, px))
            state[("point", i)] = CoPlanarPoint(region, anchor_frame, anchor_px)
        else:
            depth = init_poses[anchor_frame].inverse().transform(tri_points[i])[2]
            state[("point", i)] = InverseDepthPoint(
                anchor_frame, anchor_px, 1.0 / max(depth, cfg.min_depth))

    for j in sorted(tri_lines):
        anchor_frame, anchor_eps = anchor_of_line[j]
        region = j % len(cfg.walls)
        assoc = associations.get(region)
        if (variant.coplanar_mode == "reparam" and assoc is not None
                and j in assoc.inlier_lines):
            state[("line", j)] = CoPlanarLine(region, anchor_frame, tuple(anchor_eps))
        else:
            state[("line", j)] = plucker_to_orthonormal(tri_lines[j])

    for region, assoc in associations.items():
        state[("plane", region)] = assoc.plane

    # edges; anchored landmarks sit on their anchor ray by construction, so
    # the anchor-frame residual is identically zero and its edge is dead work
    problem = Problem(K=K, state=state)
    pixel_info = np.eye(2) / max(cfg.pixel_noise_sigma, 1e-3) ** 2
    for i in sorted(tri_points):
        lm = state[("point", i)]
        anchor = getattr(lm, "anchor_frame", None)
        for k, px in meas.point_obs[i]:
            if k == anchor:
                continue
            problem.edges.append(PointReprojEdge(k, ("point", i), px, pixel_info))
    for j in sorted(tri_lines):
        lm = state[("line", j)]
        anchor = getattr(lm, "anchor_frame", None)
        for k, eps in meas.line_obs[j]:
            if k == anchor:
                continue
            problem.edges.append(LineReprojEdge(k, ("line", j), tuple(eps), pixel_info))

    sigma_theta = max(np.deg2rad(cfg.odom_sigma_theta_deg), 1e-4)
    sigma_p = max(cfg.odom_sigma_p, 1e-4)
    odom_info = np.diag([1.0 / sigma_p**2] * 3 + [1.0 / sigma_theta**2] * 3)
    for k, rel in enumerate(meas.odometry):
        problem.edges.append(OdometryEdge(k, k + 1, rel, odom_info))
    problem.edges.append(PosePriorEdge(0, init_poses[0], np.eye(6) * 1e8))

    if variant.coplanar_mode == "residual":
        plane_info = np.array([[1.0 / cfg.plane_residual_sigma**2]])
        line_plane_info = np.eye(2) / cfg.plane_residual_sigma**2
        if cfg.plane_residual_robust_scale > 0:
            problem.plane_loss = RobustLoss(
                "cauchy", cfg.plane_residual_robust_scale)
        for region, assoc in associations.items():
            for i in assoc.inlier_points:
                problem.edges.append(
                    PointPlaneEdge(("point", i), ("plane", region), plane_info))
            for j in assoc.inlier_lines:
                if ("line", j) in state:
                    problem.edges.append(
                        LinePlaneEdge(("line", j), ("plane", region), line_plane_info))
    return problem, info


# ---------------------------------------------------------------------------
# Scoring and Monte-Carlo driver
# ---------------------------------------------------------------------------

def ate_rmse(estimated: List[Pose], ground_truth: List[Pose],
             align: str = "rigid") -> float:
    """RMS translational distance, optionally after best rigid alignment."""
    if len(estimated) != len(ground_truth):
        raise ValueError("pose sequences must have equal length")
    if align not in ("none", "rigid"):
        raise ValueError(f"unknown alignment {align!r}")
    est = np.array([p.translation for p in estimated])
    ref = np.array([p.translation for p in ground_truth])
    if align == "rigid":
        mu_e, mu_r = est.mean(axis=0), ref.mean(axis=0)
        H = (est - mu_e).T @ (ref - mu_r)
        U, _, Vt = np.linalg.svd(H)
        S = np.diag([1.0, 1.0, np.sign(np.linalg.det(Vt.T @ U.T))])
        R = Vt.T @ S @ U.T
        t = mu_r - R @ mu_e
        est = est @ R.T + t
    return float(np.sqrt(np.mean(np.sum((est - ref) ** 2, axis=1))))


@dataclass
class RunReport:
    variant: str
    seed: int
    rmse_m: float = np.nan
    opt_time_s: float = np.nan
    items: int = 0
    parameters: int = 0
    iterations: int = 0
    converged: bool = False
    degraded_regions: int = 0
    error: Optional[str] = None


def run_variant(gt: GroundTruth, meas: MeasurementSet, variant: VariantSpec,
                cfg: SceneConfig, max_iterations: int = 10) -> RunReport:
    report = RunReport(variant.id, cfg.rng_seed)
    try:
        problem, build_info = build_problem(gt, meas, variant, cfg)
        report.items, report.parameters = count_items_parameters(problem)
        report.degraded_regions = build_info.degraded_regions
        state, solve = optimize(problem, problem.state, max_iterations, mode="gn")
        est = [state[("pose", k)] for k in range(cfg.n_poses)]
        report.rmse_m = ate_rmse(est, gt.poses, align="rigid")
        report.opt_time_s = solve.optimization_time
        report.iterations = solve.iterations
        report.converged = solve.converged
    except Exception as exc:  # individual run failures are recorded, not fatal
        report.error = f"{type(exc).__name__}: {exc}"
    return report


def run_once(cfg: SceneConfig, variant_ids: List[str],
             max_iterations: int = 10) -> List[RunReport]:
    """One seeded scene, all requested variants on identical measurements."""
    gt, meas = generate_scene(cfg)
    variants = [VARIANTS[v] for v in variant_ids]
    return [run_variant(gt, meas, v, cfg, max_iterations) for v in variants]


def summarize(reports: List[RunReport]) -> Dict[str, dict]:
    """Per-variant medians over successful runs."""
    summary: Dict[str, dict] = {}
    by_variant: Dict[str, list] = {}
    for r in reports:
        by_variant.setdefault(r.variant, []).append(r)
    for vid, runs in by_variant.items():
        ok = [r for r in runs if r.error is None and np.isfinite(r.rmse_m)]
        entry = {
            "runs": len(runs),
            "failures": len(runs) - len(ok),
            "median_rmse_m": float(np.median([r.rmse_m for r in ok])) if ok else np.nan,
            "median_opt_time_s": float(np.median([r.opt_time_s for r in ok])) if ok else np.nan,
            "items": ok[0].items if ok else 0,
            "parameters": ok[0].parameters if ok else 0,
        }
        summary[vid] = entry
    return summary


def run_monte_carlo(cfg: SceneConfig, variant_ids: List[str], n_runs: int,
                    max_iterations: int = 10, jobs: int = 1):
    """(all RunReports, per-variant median summary). Run r uses seed
    cfg.rng_seed + r; within a run every variant sees identical data."""
    if n_runs < 1:
        raise ValueError("n_runs must be >= 1")
    run_cfgs = [dataclasses.replace(cfg, rng_seed=cfg.rng_seed + r)
                for r in range(n_runs)]
    reports: List[RunReport] = []
    if jobs > 1:
        import concurrent.futures as cf
        with cf.ProcessPoolExecutor(max_workers=jobs) as ex:
            for result in ex.map(_run_once_star,
                                 [(c, variant_ids, max_iterations) for c in run_cfgs]):
                reports.extend(result)
    else:
        for c in run_cfgs:
            reports.extend(run_once(c, variant_ids, max_iterations))
    return reports, summarize(reports)


def _run_once_star(args):
    return run_once(*args)
