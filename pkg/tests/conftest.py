"""Shared fixtures: random edge configurations for every edge kind and a
central finite-difference Jacobian oracle over manifold tangent coordinates."""

from __future__ import annotations

import numpy as np
import pytest

from coplanar_ba.geometry import (
    CameraIntrinsics,
    Plane,
    PluckerLine,
    Pose,
    plucker_to_orthonormal,
    project,
    quat_exp,
)
from coplanar_ba.parametrization import (
    CoPlanarLine,
    CoPlanarPoint,
    EuclideanPoint,
    InverseDepthPoint,
)
from coplanar_ba.residuals import (
    EvalContext,
    LinePlaneEdge,
    LineReprojEdge,
    OdometryEdge,
    PointPlaneEdge,
    PointReprojEdge,
    PosePriorEdge,
)
from coplanar_ba.solver import tangent_dim, value_boxplus

K_DEFAULT = CameraIntrinsics(460.0, 460.0, 320.0, 240.0)


@pytest.fixture
def K():
    return K_DEFAULT


def random_pose(rng, rot_scale=0.2, trans_scale=0.5, center=(0.0, 0.0, 0.0)):
    q = quat_exp(rng.normal(size=3) * rot_scale)
    t = np.asarray(center, dtype=float) + rng.normal(size=3) * trans_scale
    return Pose(q, t)


def random_unit(rng):
    v = rng.normal(size=3)
    return v / np.linalg.norm(v)


def _point_in_front(pose, rng, depth_lo=2.0, depth_hi=6.0):
    """World point that projects inside the image of `pose`."""
    K = K_DEFAULT
    px = np.array([rng.uniform(100, 540), rng.uniform(80, 400)])
    ray = np.array([(px[0] - K.cx) / K.fx, (px[1] - K.cy) / K.fy, 1.0])
    return pose.transform(ray * rng.uniform(depth_lo, depth_hi))


def make_point_reproj_euclidean(rng):
    anchor = random_pose(rng)
    x_w = _point_in_front(anchor, rng)
    obs = random_pose(rng, rot_scale=0.05, trans_scale=0.3,
                      center=anchor.translation)
    state = {("pose", 0): obs, ("point", 0): EuclideanPoint(x_w)}
    px = project(K_DEFAULT, obs.inverse().transform(x_w)) + rng.normal(0, 2, 2)
    return PointReprojEdge(0, ("point", 0), px), state


def make_point_reproj_invdepth(rng):
    anchor = random_pose(rng)
    x_w = _point_in_front(anchor, rng)
    p_cam = anchor.inverse().transform(x_w)
    px_anchor = project(K_DEFAULT, p_cam)
    obs = random_pose(rng, rot_scale=0.05, trans_scale=0.3,
                      center=anchor.translation)
    state = {
        ("pose", 0): obs,
        ("pose", 1): anchor,
        ("point", 0): InverseDepthPoint(1, px_anchor, 1.0 / p_cam[2]),
    }
    px = project(K_DEFAULT, obs.inverse().transform(x_w)) + rng.normal(0, 2, 2)
    return PointReprojEdge(0, ("point", 0), px), state


def _plane_through(rng, point, min_incidence=0.4):
    """Random plane through `point` whose normal is not grazing the view ray."""
    while True:
        n = random_unit(rng)
        ray = point / max(np.linalg.norm(point), 1e-9)
        if abs(float(n @ ray)) > min_incidence:
            return Plane(n, -float(n @ point))


def make_point_reproj_coplanar(rng):
    anchor = random_pose(rng)
    x_w = _point_in_front(anchor, rng)
    px_anchor = project(K_DEFAULT, anchor.inverse().transform(x_w))
    ray_w = anchor.rotation_matrix @ np.array(
        [(px_anchor[0] - K_DEFAULT.cx) / K_DEFAULT.fx,
         (px_anchor[1] - K_DEFAULT.cy) / K_DEFAULT.fy, 1.0])
    while True:
        n = random_unit(rng)
        if abs(float(n @ (ray_w / np.linalg.norm(ray_w)))) > 0.4:
            break
    plane = Plane(n, -float(n @ x_w))
    obs = random_pose(rng, rot_scale=0.05, trans_scale=0.3,
                      center=anchor.translation)
    state = {
        ("pose", 0): obs,
        ("pose", 1): anchor,
        ("plane", 0): plane,
        ("point", 0): CoPlanarPoint(0, 1, px_anchor),
    }
    px = project(K_DEFAULT, obs.inverse().transform(x_w)) + rng.normal(0, 2, 2)
    return PointReprojEdge(0, ("point", 0), px), state


def _line_in_front(rng, pose):
    p1 = _point_in_front(pose, rng)
    p2 = _point_in_front(pose, rng)
    return p1, p2


def make_line_reproj_orthonormal(rng):
    obs = random_pose(rng)
    p1, p2 = _line_in_front(rng, obs)
    line = plucker_to_orthonormal(PluckerLine.from_points(p1, p2))
    s = project(K_DEFAULT, obs.inverse().transform(p1)) + rng.normal(0, 2, 2)
    e = project(K_DEFAULT, obs.inverse().transform(p2)) + rng.normal(0, 2, 2)
    state = {("pose", 0): obs, ("line", 0): line}
    return LineReprojEdge(0, ("line", 0), (s, e)), state


def make_line_reproj_coplanar(rng):
    anchor = random_pose(rng)
    p1, p2 = _line_in_front(rng, anchor)
    mid = 0.5 * (p1 + p2)
    d = (p2 - p1) / np.linalg.norm(p2 - p1)
    while True:
        n = random_unit(rng)
        n = n - float(n @ d) * d  # plane must contain the line direction
        if np.linalg.norm(n) > 0.4:
            break
    plane = Plane(n, -float((n / np.linalg.norm(n)) @ mid))
    eps = (project(K_DEFAULT, anchor.inverse().transform(p1)),
           project(K_DEFAULT, anchor.inverse().transform(p2)))
    obs = random_pose(rng, rot_scale=0.05, trans_scale=0.3,
                      center=anchor.translation)
    s = project(K_DEFAULT, obs.inverse().transform(p1)) + rng.normal(0, 2, 2)
    e = project(K_DEFAULT, obs.inverse().transform(p2)) + rng.normal(0, 2, 2)
    state = {
        ("pose", 0): obs,
        ("pose", 1): anchor,
        ("plane", 0): plane,
        ("line", 0): CoPlanarLine(0, 1, eps),
    }
    return LineReprojEdge(0, ("line", 0), (s, e)), state


def make_odometry(rng):
    a = random_pose(rng)
    b = random_pose(rng, center=a.translation)
    measured = a.inverse().compose(b)
    measured = value_boxplus(measured, rng.normal(0, 0.05, 6))
    state = {("pose", 0): a, ("pose", 1): b}
    return OdometryEdge(0, 1, measured), state


def make_pose_prior(rng):
    a = random_pose(rng)
    prior = value_boxplus(a, rng.normal(0, 0.1, 6))
    return PosePriorEdge(0, prior), {("pose", 0): a}


def make_point_plane_euclidean(rng):
    x_w = rng.normal(0, 3, 3)
    plane = Plane(random_unit(rng), rng.normal(0, 2))
    state = {("point", 0): EuclideanPoint(x_w), ("plane", 0): plane}
    return PointPlaneEdge(("point", 0), ("plane", 0)), state


def make_point_plane_invdepth(rng):
    anchor = random_pose(rng)
    x_w = _point_in_front(anchor, rng)
    p_cam = anchor.inverse().transform(x_w)
    px = project(K_DEFAULT, p_cam)
    plane = Plane(random_unit(rng), rng.normal(0, 2))
    state = {
        ("pose", 1): anchor,
        ("point", 0): InverseDepthPoint(1, px, 1.0 / p_cam[2]),
        ("plane", 0): plane,
    }
    return PointPlaneEdge(("point", 0), ("plane", 0)), state


def make_line_plane(rng):
    p1 = rng.normal(0, 3, 3)
    p2 = p1 + random_unit(rng) * rng.uniform(0.5, 3.0)
    line = plucker_to_orthonormal(PluckerLine.from_points(p1, p2))
    plane = Plane(random_unit(rng), rng.normal(0, 2))
    state = {("line", 0): line, ("plane", 0): plane}
    return LinePlaneEdge(("line", 0), ("plane", 0)), state


EDGE_FACTORIES = {
    "point_reproj_euclidean": make_point_reproj_euclidean,
    "point_reproj_inverse_depth": make_point_reproj_invdepth,
    "point_reproj_coplanar": make_point_reproj_coplanar,
    "line_reproj_orthonormal": make_line_reproj_orthonormal,
    "line_reproj_coplanar": make_line_reproj_coplanar,
    "odometry": make_odometry,
    "pose_prior": make_pose_prior,
    "point_plane_euclidean": make_point_plane_euclidean,
    "point_plane_inverse_depth": make_point_plane_invdepth,
    "line_plane": make_line_plane,
}


def make_toy_problem(rng, max_poses=10, max_landmarks=30):
    """Small random but well-posed bundle-adjustment problem: a pose chain
    with odometry and a prior, mixed landmark types, optional plane terms."""
    from coplanar_ba.residuals import OdometryEdge as _Odom
    from coplanar_ba.solver import Problem

    n_poses = int(rng.integers(2, max_poses + 1))
    poses = []
    for k in range(n_poses):
        q = quat_exp(rng.normal(0, 0.05, 3))
        t = np.array([0.4 * k, 0.0, 0.0]) + rng.normal(0, 0.05, 3)
        poses.append(Pose(q, t))
    state = {("pose", k): p for k, p in enumerate(poses)}
    edges = []
    for k in range(n_poses - 1):
        rel = poses[k].inverse().compose(poses[k + 1])
        rel = value_boxplus(rel, rng.normal(0, 0.01, 6))
        edges.append(_Odom(k, k + 1, rel, np.eye(6) * 100.0))
    edges.append(PosePriorEdge(0, poses[0], np.eye(6) * 1e6))

    n_points = int(rng.integers(3, max(4, max_landmarks - 4)))
    n_lines = int(rng.integers(0, 5))
    use_plane = rng.uniform() < 0.5
    plane = Plane(rng.normal(size=3) + np.array([0.0, 0.0, 2.0]),
                  -rng.uniform(3.0, 6.0))
    if use_plane:
        state[("plane", 0)] = plane

    for i in range(n_points):
        host = int(rng.integers(0, n_poses))
        x_w = _point_in_front(poses[host], rng, depth_lo=3.0, depth_hi=8.0)
        if rng.uniform() < 0.5:
            state[("point", i)] = EuclideanPoint(x_w)
        else:
            p_cam = poses[host].inverse().transform(x_w)
            state[("point", i)] = InverseDepthPoint(
                host, project(K_DEFAULT, p_cam), 1.0 / p_cam[2])
        n_obs = 0
        for k in range(n_poses):
            x_c = poses[k].inverse().transform(x_w)
            if x_c[2] < 0.5:
                continue
            px = project(K_DEFAULT, x_c) + rng.normal(0, 1.0, 2)
            edges.append(PointReprojEdge(k, ("point", i), px))
            n_obs += 1
        if use_plane and rng.uniform() < 0.7:
            edges.append(PointPlaneEdge(("point", i), ("plane", 0),
                                        np.eye(1) * 25.0))

    for j in range(n_lines):
        host = int(rng.integers(0, n_poses))
        p1 = _point_in_front(poses[host], rng, depth_lo=3.0, depth_hi=8.0)
        p2 = p1 + rng.normal(0, 1.0, 3)
        if np.linalg.norm(p2 - p1) < 0.3:
            continue
        state[("line", j)] = plucker_to_orthonormal(
            PluckerLine.from_points(p1, p2))
        for k in range(n_poses):
            ca = poses[k].inverse().transform(p1)
            cb = poses[k].inverse().transform(p2)
            if ca[2] < 0.5 or cb[2] < 0.5:
                continue
            s = project(K_DEFAULT, ca) + rng.normal(0, 1.0, 2)
            e = project(K_DEFAULT, cb) + rng.normal(0, 1.0, 2)
            edges.append(LineReprojEdge(k, ("line", j), (s, e)))
        if use_plane and rng.uniform() < 0.5:
            edges.append(LinePlaneEdge(("line", j), ("plane", 0),
                                       np.eye(2) * 25.0))

    problem = Problem(K=K_DEFAULT, state=state, edges=edges)
    return problem


def eval_residual(edge, state):
    r, _ = edge.evaluate(EvalContext(state, K_DEFAULT, want_jacobians=False))
    return r


def fd_jacobian(edge, state, key, step=1e-6):
    """Central finite differences of the edge residual over the tangent of
    one variable block."""
    dim = tangent_dim(state[key])
    r0 = eval_residual(edge, state)
    J = np.empty((r0.shape[0], dim))
    for i in range(dim):
        delta = np.zeros(dim)
        delta[i] = step
        hi = dict(state)
        hi[key] = value_boxplus(state[key], delta)
        lo = dict(state)
        lo[key] = value_boxplus(state[key], -delta)
        J[:, i] = (eval_residual(edge, hi) - eval_residual(edge, lo)) / (2 * step)
    return J


def check_edge_jacobians(edge, state, abs_tol=1e-5, rel_tol=1e-4):
    """Compare every analytic Jacobian block against finite differences.

    Returns a list of (block key, max violation) for blocks out of tolerance.
    """
    _, jacs = edge.evaluate(EvalContext(state, K_DEFAULT))
    failures = []
    for key, J in jacs.items():
        J_fd = fd_jacobian(edge, state, key)
        tol = np.maximum(abs_tol, rel_tol * np.abs(J_fd))
        err = np.abs(J - J_fd) - tol
        if np.any(err > 0):
            failures.append((key, float(err.max())))
    if not jacs:
        failures.append(("<no blocks>", np.inf))
    return failures
