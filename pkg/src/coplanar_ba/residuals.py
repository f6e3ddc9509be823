"""Residual and Jacobian evaluation for reprojection, odometry and
plane-distance edges, with robust loss weighting.

Every edge evaluates to (residual, {block_key: jacobian}) where jacobians are
taken with respect to the tangent coordinates of each incident variable
block. Co-planar landmark edges have no landmark block; their landmark
jacobian chains through the shared plane block and the anchor pose.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Dict, Optional, Tuple

import numpy as np

from .geometry import (
    CameraIntrinsics,
    Plane,
    Pose,
    backproject,
    skew,
    so3_left_jacobian_inverse,
    so3_log,
    so3_right_jacobian_inverse,
    sphere_tangent_basis,
)
from .parametrization import (
    CoPlanarLine,
    CoPlanarPoint,
    EuclideanPoint,
    InverseDepthPoint,
    OrthonormalLine,
    RayParallelToPlaneError,
)

MIN_DEPTH = 1e-6

_E1 = np.array([1.0, 0.0, 0.0])
_E2 = np.array([0.0, 1.0, 0.0])
_SKEW_E1 = skew(_E1)
_SKEW_E2 = skew(_E2)


class BehindCameraError(ValueError):
    """Landmark projects behind the observing camera."""


@dataclass(frozen=True)
class RobustLoss:
    kind: str = "none"  # "none" | "cauchy"
    scale: float = 1.0

    def __post_init__(self):
        if self.kind not in ("none", "cauchy"):
            raise ValueError(f"unknown robust loss {self.kind!r}")
        if self.scale <= 0:
            raise ValueError("loss scale must be positive")


def robust_weight(loss: RobustLoss, squared_whitened_norm: float) -> Tuple[float, float]:
    """(cost contribution, IRLS weight) for a squared whitened residual norm."""
    s = float(squared_whitened_norm)
    if s < 0:
        raise ValueError("squared norm must be non-negative")
    if loss.kind == "none":
        return s, 1.0
    c2 = loss.scale * loss.scale
    return c2 * np.log1p(s / c2), 1.0 / (1.0 + s / c2)


# ---------------------------------------------------------------------------
# Evaluation context: state access with per-iteration caching
# ---------------------------------------------------------------------------

class EvalContext:
    """State snapshot for one linearization pass.

    Caches per-pose rotation matrices and per-landmark world geometry so the
    expensive chains (plane -> depth -> world point) run once per landmark
    and not once per observation.
    """

    def __init__(self, state: Dict, K: CameraIntrinsics,
                 want_jacobians: bool = True):
        self.state = state
        self.K = K
        # cost-only passes skip every Jacobian chain; edges must check this
        self.want_jacobians = want_jacobians
        self._pose_rt: Dict = {}
        self._points: Dict = {}
        self._lines: Dict = {}
        self._plane_basis: Dict = {}

    def plane_basis(self, plane_key):
        """Tangent basis of a plane normal, shared by every chain that
        touches the plane in this linearization pass."""
        B = self._plane_basis.get(plane_key)
        if B is None:
            B = sphere_tangent_basis(self.state[plane_key].normal)
            self._plane_basis[plane_key] = B
        return B

    def pose_rt(self, key):
        cached = self._pose_rt.get(key)
        if cached is None:
            pose = self.state[key]
            cached = (pose.rotation_matrix, pose.translation)
            self._pose_rt[key] = cached
        return cached

    def point_world(self, lm_key):
        """(X_w, {block_key: dX_w/d tangent}) for a point landmark."""
        cached = self._points.get(lm_key)
        if cached is None:
            cached = self._compute_point(lm_key)
            self._points[lm_key] = cached
        return cached

    def line_world(self, lm_key):
        """((moment, direction), {block_key: d(m,d)/d tangent}) for a line."""
        cached = self._lines.get(lm_key)
        if cached is None:
            cached = self._compute_line(lm_key)
            self._lines[lm_key] = cached
        return cached

    # -- point landmark chains ---------------------------------------------

    def _compute_point(self, lm_key):
        lm = self.state[lm_key]
        if isinstance(lm, EuclideanPoint):
            if not self.want_jacobians:
                return np.asarray(lm.position, dtype=float), {}
            return np.asarray(lm.position, dtype=float), {lm_key: np.eye(3)}
        if isinstance(lm, InverseDepthPoint):
            anchor_key = ("pose", lm.anchor_frame)
            Ra, ta = self.pose_rt(anchor_key)
            ray = backproject(self.K, lm.anchor_pixel)
            p_cam = ray / lm.inverse_depth
            x_w = Ra @ p_cam + ta
            if not self.want_jacobians:
                return x_w, {}
            j_anchor = np.empty((3, 6))
            j_anchor[:, :3] = np.eye(3)
            j_anchor[:, 3:] = -Ra @ skew(p_cam)
            jacs = {
                lm_key: (-(Ra @ ray) / lm.inverse_depth**2).reshape(3, 1),
                anchor_key: j_anchor,
            }
            return x_w, jacs
        if isinstance(lm, CoPlanarPoint):
            plane_key = ("plane", lm.plane_id)
            anchor_key = ("pose", lm.anchor_frame)
            plane: Plane = self.state[plane_key]
            Ra, ta = self.pose_rt(anchor_key)
            ray = backproject(self.K, lm.anchor_pixel)
            a = Ra @ ray  # ray in world orientation
            n, d = plane.normal, plane.offset
            s = float(n @ a)
            if abs(s) < 1e-9:
                raise RayParallelToPlaneError("anchor ray parallel to plane")
            h = -(d + float(n @ ta)) / s
            x_w = h * a + ta
            if not self.want_jacobians:
                return x_w, {}

            dh_dn = (-ta - h * a) / s  # row vector as 1d
            dh_dd = -1.0 / s
            B = self.plane_basis(plane_key)
            j_plane = np.empty((3, 3))
            j_plane[:, :2] = np.outer(a, dh_dn @ B)
            j_plane[:, 2] = a * dh_dd

            eye3 = np.eye(3)
            da_dth = -Ra @ skew(ray)
            j_anchor = np.empty((3, 6))
            j_anchor[:, :3] = np.outer(a, -n / s) + eye3
            j_anchor[:, 3:] = (np.outer(a, -h * n / s) + h * eye3) @ da_dth
            jacs = {plane_key: j_plane, anchor_key: j_anchor}
            return x_w, jacs
        raise TypeError(f"not a point landmark: {type(lm).__name__}")

    # -- line landmark chains ----------------------------------------------

    def _compute_line(self, lm_key):
        lm = self.state[lm_key]
        if isinstance(lm, OrthonormalLine):
            U, W = lm.frame, lm.scale
            c, s = W[0, 0], W[1, 0]
            m = c * U[:, 0]
            d = s * U[:, 1]
            if not self.want_jacobians:
                return (m, d), {}
            J = np.zeros((6, 4))
            J[:3, :3] = -c * U @ _SKEW_E1
            J[3:, :3] = -s * U @ _SKEW_E2
            J[:3, 3] = -s * U[:, 0]
            J[3:, 3] = c * U[:, 1]
            return (m, d), {lm_key: J}
        if isinstance(lm, CoPlanarLine):
            plane_key = ("plane", lm.plane_id)
            anchor_key = ("pose", lm.anchor_frame)
            plane: Plane = self.state[plane_key]
            Ra, ta = self.pose_rt(anchor_key)
            r1 = backproject(self.K, lm.anchor_endpoints[0])
            r2 = backproject(self.K, lm.anchor_endpoints[1])
            m_cam = np.cross(r1, r2)
            m_cam = m_cam / np.linalg.norm(m_cam)
            na = Ra @ m_cam            # back-projection plane normal (world)
            da = -float(na @ ta)
            nb, db = plane.normal, plane.offset

            direction = np.cross(nb, na)
            moment = db * na - da * nb
            if not self.want_jacobians:
                return (moment, direction), {}

            # plane block: tangent [du (2, sphere), dd]
            B = self.plane_basis(plane_key)
            j_plane = np.zeros((6, 3))
            j_plane[:3, :2] = -da * B
            j_plane[:3, 2] = na
            j_plane[3:, :2] = -skew(na) @ B

            # anchor pose: na depends on rotation, da on both
            dna_dth = -Ra @ skew(m_cam)
            dda_dt = -na
            dda_dth = -ta @ dna_dth
            dm_dna = db * np.eye(3)
            dm_dda = -nb
            ddir_dna = skew(nb)
            j_anchor = np.zeros((6, 6))
            j_anchor[:3, :3] = np.outer(dm_dda, dda_dt)
            j_anchor[:3, 3:] = dm_dna @ dna_dth + np.outer(dm_dda, dda_dth)
            j_anchor[3:, 3:] = ddir_dna @ dna_dth
            return (moment, direction), {plane_key: j_plane, anchor_key: j_anchor}
        raise TypeError(f"not a line landmark: {type(lm).__name__}")


# ---------------------------------------------------------------------------
# Edges
# ---------------------------------------------------------------------------

@dataclass
class PointReprojEdge:
    frame: int
    landmark: Tuple
    pixel: np.ndarray
    information: np.ndarray = field(default_factory=lambda: np.eye(2))

    residual_dim = 2

    def blocks(self, problem_state):
        lm = problem_state[self.landmark]
        keys = [("pose", self.frame)]
        if isinstance(lm, EuclideanPoint):
            keys.append(self.landmark)
        elif isinstance(lm, InverseDepthPoint):
            keys += [self.landmark, ("pose", lm.anchor_frame)]
        elif isinstance(lm, CoPlanarPoint):
            keys += [("plane", lm.plane_id), ("pose", lm.anchor_frame)]
        return keys

    def evaluate(self, ctx: EvalContext):
        pose_key = ("pose", self.frame)
        R, t = ctx.pose_rt(pose_key)
        x_w, point_jacs = ctx.point_world(self.landmark)
        x_c = R.T @ (x_w - t)
        if x_c[2] < MIN_DEPTH:
            raise BehindCameraError(f"landmark {self.landmark} behind frame {self.frame}")
        K = ctx.K
        z = x_c[2]
        proj = np.array([K.fx * x_c[0] / z + K.cx, K.fy * x_c[1] / z + K.cy])
        r = np.asarray(self.pixel, dtype=float) - proj
        if not ctx.want_jacobians:
            return r, {}

        dproj = np.array([[K.fx / z, 0.0, -K.fx * x_c[0] / z**2],
                          [0.0, K.fy / z, -K.fy * x_c[1] / z**2]])
        dr_dxc = -dproj
        jacs: Dict = {}
        # observing pose: dx_c/ddt = -R^T, dx_c/ddth = [x_c]x
        dr_dxw = dr_dxc @ R.T
        j_pose = np.empty((2, 6))
        j_pose[:, :3] = -dr_dxw
        j_pose[:, 3:] = dr_dxc @ skew(x_c)
        jacs[pose_key] = j_pose
        for key, J in point_jacs.items():
            add = dr_dxw @ J
            if key in jacs:
                jacs[key] = jacs[key] + add
            else:
                jacs[key] = add
        return r, jacs


@dataclass
class LineReprojEdge:
    frame: int
    landmark: Tuple
    endpoints: Tuple[np.ndarray, np.ndarray]
    information: np.ndarray = field(default_factory=lambda: np.eye(2))

    residual_dim = 2

    def blocks(self, problem_state):
        lm = problem_state[self.landmark]
        keys = [("pose", self.frame)]
        if isinstance(lm, OrthonormalLine):
            keys.append(self.landmark)
        elif isinstance(lm, CoPlanarLine):
            keys += [("plane", lm.plane_id), ("pose", lm.anchor_frame)]
        return keys

    def evaluate(self, ctx: EvalContext):
        pose_key = ("pose", self.frame)
        R, t = ctx.pose_rt(pose_key)
        (m_w, d_w), line_jacs = ctx.line_world(self.landmark)
        m_c = R.T @ (m_w - np.cross(t, d_w))
        KL = ctx.K.line_projection_matrix()
        l = KL @ m_c
        w2 = l[0] * l[0] + l[1] * l[1]
        if w2 < 1e-18:
            raise BehindCameraError(f"degenerate line projection for {self.landmark}")
        w = np.sqrt(w2)
        s_h = np.array([self.endpoints[0][0], self.endpoints[0][1], 1.0])
        e_h = np.array([self.endpoints[1][0], self.endpoints[1][1], 1.0])
        r = np.array([s_h @ l, e_h @ l]) / w
        if not ctx.want_jacobians:
            return r, {}

        grad_w = np.array([l[0], l[1], 0.0]) / w
        dr_dl = np.vstack([s_h / w - r[0] * grad_w / w,
                           e_h / w - r[1] * grad_w / w])
        dr_dmc = dr_dl @ KL

        jacs: Dict = {}
        # observing pose: dm_c/ddt = R^T [d_w]x, dm_c/ddth = [m_c]x
        j_pose = np.empty((2, 6))
        j_pose[:, :3] = dr_dmc @ (R.T @ skew(d_w))
        j_pose[:, 3:] = dr_dmc @ skew(m_c)
        jacs[pose_key] = j_pose
        dmc_dmw = R.T
        dmc_ddw = -R.T @ skew(t)
        for key, J in line_jacs.items():
            add = dr_dmc @ (dmc_dmw @ J[:3] + dmc_ddw @ J[3:])
            if key in jacs:
                jacs[key] = jacs[key] + add
            else:
                jacs[key] = add
        return r, jacs


@dataclass
class OdometryEdge:
    frame_a: int
    frame_b: int
    measured: Pose
    information: np.ndarray = field(default_factory=lambda: np.eye(6))

    residual_dim = 6

    def blocks(self, problem_state):
        return [("pose", self.frame_a), ("pose", self.frame_b)]

    def evaluate(self, ctx: EvalContext):
        key_a, key_b = ("pose", self.frame_a), ("pose", self.frame_b)
        Ra, ta = ctx.pose_rt(key_a)
        Rb, tb = ctx.pose_rt(key_b)
        Rm = self.measured.rotation_matrix
        t_rel = Ra.T @ (tb - ta)
        R_err = Rm.T @ (Ra.T @ Rb)
        r_th = so3_log(R_err)
        r = np.concatenate([t_rel - self.measured.translation, r_th])
        if not ctx.want_jacobians:
            return r, {}

        Jr_inv = so3_right_jacobian_inverse(r_th)
        Jl_inv = so3_left_jacobian_inverse(r_th)
        Ja = np.zeros((6, 6))
        Ja[:3, :3] = -Ra.T
        Ja[:3, 3:] = skew(t_rel)
        Ja[3:, 3:] = -Jl_inv @ Rm.T
        Jb = np.zeros((6, 6))
        Jb[:3, :3] = Ra.T
        Jb[3:, 3:] = Jr_inv
        return r, {key_a: Ja, key_b: Jb}


@dataclass
class PosePriorEdge:
    frame: int
    prior: Pose
    information: np.ndarray = field(default_factory=lambda: np.eye(6))

    residual_dim = 6

    def blocks(self, problem_state):
        return [("pose", self.frame)]

    def evaluate(self, ctx: EvalContext):
        key = ("pose", self.frame)
        R, t = ctx.pose_rt(key)
        r_th = so3_log(self.prior.rotation_matrix.T @ R)
        r = np.concatenate([t - self.prior.translation, r_th])
        if not ctx.want_jacobians:
            return r, {}
        J = np.zeros((6, 6))
        J[:3, :3] = np.eye(3)
        J[3:, 3:] = so3_right_jacobian_inverse(r_th)
        return r, {key: J}


@dataclass
class PointPlaneEdge:
    """Signed point-to-plane distance residual (the '-r' formulation)."""

    landmark: Tuple
    plane: Tuple
    information: np.ndarray = field(default_factory=lambda: np.eye(1))

    residual_dim = 1

    def blocks(self, problem_state):
        lm = problem_state[self.landmark]
        keys = [self.plane]
        if isinstance(lm, EuclideanPoint):
            keys.append(self.landmark)
        elif isinstance(lm, InverseDepthPoint):
            keys += [self.landmark, ("pose", lm.anchor_frame)]
        return keys

    def evaluate(self, ctx: EvalContext):
        plane: Plane = ctx.state[self.plane]
        x_w, point_jacs = ctx.point_world(self.landmark)
        n, d = plane.normal, plane.offset
        r = np.array([float(n @ x_w) + d])
        if not ctx.want_jacobians:
            return r, {}

        B = ctx.plane_basis(self.plane)
        jacs: Dict = {self.plane: np.concatenate([x_w @ B, [1.0]]).reshape(1, 3)}
        for key, J in point_jacs.items():
            add = (n @ J).reshape(1, -1)
            if key in jacs:
                jacs[key] = jacs[key] + add
            else:
                jacs[key] = add
        return r, jacs


@dataclass
class LinePlaneEdge:
    """Line-on-plane residual: direction-normal alignment + closest-point
    plane distance (the '-r' formulation for lines)."""

    landmark: Tuple
    plane: Tuple
    information: np.ndarray = field(default_factory=lambda: np.eye(2))

    residual_dim = 2

    def blocks(self, problem_state):
        return [self.plane, self.landmark]

    def evaluate(self, ctx: EvalContext):
        plane: Plane = ctx.state[self.plane]
        (m, d), line_jacs = ctx.line_world(self.landmark)
        n, d_pl = plane.normal, plane.offset
        nd = np.linalg.norm(d)
        d_hat = d / nd
        dd = float(d @ d)
        p0 = np.cross(d, m) / dd
        r = np.array([float(n @ d_hat), float(n @ p0) + d_pl])
        if not ctx.want_jacobians:
            return r, {}

        # partials w.r.t. the 6-dim (m, d) line coordinates
        dr1_dd = n @ (np.eye(3) - np.outer(d_hat, d_hat)) / nd
        dp0_dm = skew(d) / dd
        dp0_dd = (-skew(m) - 2.0 * np.outer(p0, d)) / dd
        dr_dline = np.zeros((2, 6))
        dr_dline[0, 3:] = dr1_dd
        dr_dline[1, :3] = n @ dp0_dm
        dr_dline[1, 3:] = n @ dp0_dd

        B = ctx.plane_basis(self.plane)
        j_plane = np.zeros((2, 3))
        j_plane[0, :2] = d_hat @ B
        j_plane[1, :2] = p0 @ B
        j_plane[1, 2] = 1.0
        jacs: Dict = {self.plane: j_plane}
        for key, J in line_jacs.items():
            add = dr_dline @ J
            if key in jacs:
                jacs[key] = jacs[key] + add
            else:
                jacs[key] = add
        return r, jacs


# convenience wrappers used directly by tests ------------------------------

def point_residual(pose: Pose, landmark_world, K: CameraIntrinsics, measured_pixel):
    x_c = pose.inverse().transform(landmark_world)
    if x_c[2] < MIN_DEPTH:
        raise BehindCameraError("landmark behind camera")
    from .geometry import project
    return np.asarray(measured_pixel, dtype=float) - project(K, x_c)


def line_residual(pose: Pose, line_world, K: CameraIntrinsics, endpoints):
    from .geometry import transform_line
    l_cam = transform_line(pose.inverse(), line_world)
    l = K.line_projection_matrix() @ l_cam.moment
    w2 = l[0] * l[0] + l[1] * l[1]
    if w2 < 1e-18:
        raise BehindCameraError("degenerate line projection")
    w = np.sqrt(w2)
    s_h = np.array([endpoints[0][0], endpoints[0][1], 1.0])
    e_h = np.array([endpoints[1][0], endpoints[1][1], 1.0])
    return np.array([s_h @ l, e_h @ l]) / w


def odometry_residual(pose_a: Pose, pose_b: Pose, measured_relative: Pose):
    from .geometry import pose_boxminus
    rel = pose_a.inverse().compose(pose_b)
    return pose_boxminus(rel, measured_relative)
