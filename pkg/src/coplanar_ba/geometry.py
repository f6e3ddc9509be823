"""Rigid-body, camera, plane and line primitives with manifold increments.

Conventions used throughout the package:
  * quaternions are [w, x, y, z], unit norm
  * a Pose maps local coordinates to parent coordinates: x_out = R x + t
    (camera poses are stored camera-to-world)
  * pose tangent vectors are 6-dim, ordered [dt (3), dtheta (3)], with
    additive translation and right-multiplicative rotation update
  * planes satisfy n . X + d = 0 with unit normal n and signed offset d
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

_EPS = 1e-12


class GeometryError(ValueError):
    """Invalid input to a geometric operation."""


class DegenerateLineError(GeometryError):
    """Line with zero direction or otherwise unusable configuration."""


def skew(v):
    v = np.asarray(v, dtype=float)
    return np.array([[0.0, -v[2], v[1]],
                     [v[2], 0.0, -v[0]],
                     [-v[1], v[0], 0.0]])


# ---------------------------------------------------------------------------
# SO(3) / quaternion helpers
# ---------------------------------------------------------------------------

def quat_multiply(a, b):
    aw, ax, ay, az = a
    bw, bx, by, bz = b
    return np.array([
        aw * bw - ax * bx - ay * by - az * bz,
        aw * bx + ax * bw + ay * bz - az * by,
        aw * by - ax * bz + ay * bw + az * bx,
        aw * bz + ax * by - ay * bx + az * bw,
    ])


def quat_conjugate(q):
    return np.array([q[0], -q[1], -q[2], -q[3]])


def quat_normalize(q):
    return np.asarray(q, dtype=float) / np.linalg.norm(q)


def quat_to_matrix(q):
    w, x, y, z = q
    return np.array([
        [1 - 2 * (y * y + z * z), 2 * (x * y - w * z), 2 * (x * z + w * y)],
        [2 * (x * y + w * z), 1 - 2 * (x * x + z * z), 2 * (y * z - w * x)],
        [2 * (x * z - w * y), 2 * (y * z + w * x), 1 - 2 * (x * x + y * y)],
    ])


def quat_exp(phi):
    """Map a rotation vector to a unit quaternion."""
    phi = np.asarray(phi, dtype=float)
    angle = np.linalg.norm(phi)
    if angle < 1e-10:
        # second-order series; keeps exp/log consistent near zero
        half = 0.5 * phi
        w = 1.0 - 0.125 * angle * angle
        return quat_normalize(np.array([w, half[0], half[1], half[2]]))
    axis = phi / angle
    s = np.sin(0.5 * angle)
    return np.array([np.cos(0.5 * angle), s * axis[0], s * axis[1], s * axis[2]])


def quat_log(q):
    """Rotation vector of a unit quaternion (angle in [0, pi])."""
    q = np.asarray(q, dtype=float)
    if q[0] < 0:
        q = -q
    vec = q[1:]
    s = np.linalg.norm(vec)
    if s < 1e-10:
        return 2.0 * vec / max(q[0], _EPS)
    angle = 2.0 * np.arctan2(s, q[0])
    return angle * vec / s


def so3_exp(phi):
    return quat_to_matrix(quat_exp(phi))


def so3_log(R):
    """Rotation vector of a rotation matrix."""
    tr = np.trace(R)
    cos_angle = np.clip(0.5 * (tr - 1.0), -1.0, 1.0)
    angle = np.arccos(cos_angle)
    if angle < 1e-8:
        return 0.5 * np.array([R[2, 1] - R[1, 2], R[0, 2] - R[2, 0], R[1, 0] - R[0, 1]])
    if np.pi - angle < 1e-6:
        # near pi: extract axis from R + I
        A = 0.5 * (R + np.eye(3))
        axis = np.sqrt(np.maximum(np.diag(A), 0.0))
        k = int(np.argmax(axis))
        axis = A[:, k] / max(axis[k], _EPS)
        axis /= np.linalg.norm(axis)
        # fix sign from the skew part
        w = np.array([R[2, 1] - R[1, 2], R[0, 2] - R[2, 0], R[1, 0] - R[0, 1]])
        if np.dot(w, axis) < 0:
            axis = -axis
        return angle * axis
    w = np.array([R[2, 1] - R[1, 2], R[0, 2] - R[2, 0], R[1, 0] - R[0, 1]])
    return w * angle / (2.0 * np.sin(angle))


def so3_right_jacobian_inverse(phi):
    """Inverse right Jacobian of SO(3) at rotation vector phi."""
    phi = np.asarray(phi, dtype=float)
    angle = np.linalg.norm(phi)
    W = skew(phi)
    if angle < 1e-6:
        return np.eye(3) + 0.5 * W + W @ W / 12.0
    c = 1.0 / angle**2 - (1.0 + np.cos(angle)) / (2.0 * angle * np.sin(angle))
    return np.eye(3) + 0.5 * W + c * (W @ W)


def so3_left_jacobian_inverse(phi):
    return so3_right_jacobian_inverse(-np.asarray(phi, dtype=float))


# ---------------------------------------------------------------------------
# Pose
# ---------------------------------------------------------------------------

@dataclass
class Pose:
    """Rigid transform on SE(3): x_out = R x + t."""

    quaternion: np.ndarray = field(default_factory=lambda: np.array([1.0, 0.0, 0.0, 0.0]))
    translation: np.ndarray = field(default_factory=lambda: np.zeros(3))

    def __post_init__(self):
        self.quaternion = quat_normalize(np.asarray(self.quaternion, dtype=float))
        self.translation = np.asarray(self.translation, dtype=float).copy()

    @staticmethod
    def identity():
        return Pose()

    @staticmethod
    def from_rt(R, t):
        return Pose(matrix_to_quat(R), np.asarray(t, dtype=float))

    @property
    def rotation_matrix(self):
        return quat_to_matrix(self.quaternion)

    def compose(self, other: "Pose") -> "Pose":
        q = quat_multiply(self.quaternion, other.quaternion)
        t = self.rotation_matrix @ other.translation + self.translation
        return Pose(q, t)

    def inverse(self) -> "Pose":
        qi = quat_conjugate(self.quaternion)
        return Pose(qi, -(quat_to_matrix(qi) @ self.translation))

    def transform(self, point):
        return self.rotation_matrix @ np.asarray(point, dtype=float) + self.translation


def matrix_to_quat(R):
    R = np.asarray(R, dtype=float)
    tr = np.trace(R)
    if tr > 0:
        s = np.sqrt(tr + 1.0) * 2.0
        q = np.array([0.25 * s,
                      (R[2, 1] - R[1, 2]) / s,
                      (R[0, 2] - R[2, 0]) / s,
                      (R[1, 0] - R[0, 1]) / s])
    else:
        i = int(np.argmax(np.diag(R)))
        j, k = (i + 1) % 3, (i + 2) % 3
        s = np.sqrt(max(R[i, i] - R[j, j] - R[k, k] + 1.0, 0.0)) * 2.0
        q = np.empty(4)
        q[0] = (R[k, j] - R[j, k]) / s
        q[1 + i] = 0.25 * s
        q[1 + j] = (R[j, i] + R[i, j]) / s
        q[1 + k] = (R[k, i] + R[i, k]) / s
    return quat_normalize(q)


def pose_boxplus(p: Pose, delta) -> Pose:
    """Apply a 6-dim tangent increment [dt, dtheta] to a pose."""
    delta = np.asarray(delta, dtype=float)
    if delta.shape != (6,) or not np.all(np.isfinite(delta)):
        raise GeometryError("pose increment must be a finite 6-vector")
    q = quat_multiply(p.quaternion, quat_exp(delta[3:]))
    return Pose(q, p.translation + delta[:3])


def pose_boxminus(a: Pose, b: Pose):
    """Tangent delta such that pose_boxplus(b, delta) == a."""
    dq = quat_multiply(quat_conjugate(b.quaternion), a.quaternion)
    return np.concatenate([a.translation - b.translation, quat_log(dq)])


# ---------------------------------------------------------------------------
# Camera
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class CameraIntrinsics:
    fx: float
    fy: float
    cx: float
    cy: float

    def __post_init__(self):
        if not (self.fx > 0 and self.fy > 0):
            raise GeometryError("focal lengths must be positive")

    @property
    def matrix(self):
        return np.array([[self.fx, 0.0, self.cx],
                         [0.0, self.fy, self.cy],
                         [0.0, 0.0, 1.0]])

    def line_projection_matrix(self):
        """Matrix mapping a camera-frame line moment to a pixel-space 2D line."""
        return np.array([
            [self.fy, 0.0, 0.0],
            [0.0, self.fx, 0.0],
            [-self.fy * self.cx, -self.fx * self.cy, self.fx * self.fy],
        ])


def project(K: CameraIntrinsics, point_camera):
    p = np.asarray(point_camera, dtype=float)
    return np.array([K.fx * p[0] / p[2] + K.cx, K.fy * p[1] / p[2] + K.cy])


def backproject(K: CameraIntrinsics, pixel):
    """Unit-depth ray (x, y, 1) through a pixel."""
    u, v = pixel
    return np.array([(u - K.cx) / K.fx, (v - K.cy) / K.fy, 1.0])


# ---------------------------------------------------------------------------
# Plane
# ---------------------------------------------------------------------------

@dataclass
class Plane:
    """Plane n . X + d = 0 with unit normal."""

    normal: np.ndarray
    offset: float

    def __post_init__(self):
        n = np.asarray(self.normal, dtype=float)
        norm = np.linalg.norm(n)
        if norm < _EPS:
            raise GeometryError("plane normal must be nonzero")
        self.normal = n / norm
        self.offset = float(self.offset)

    def distance(self, point):
        return abs(float(self.normal @ np.asarray(point, dtype=float)) + self.offset)

    def signed_distance(self, point):
        return float(self.normal @ np.asarray(point, dtype=float)) + self.offset

    def as_vector4(self):
        return np.concatenate([self.normal, [self.offset]])


def sphere_tangent_basis(n):
    """Deterministic orthonormal basis (3x2) of the tangent space at unit n."""
    n = np.asarray(n, dtype=float)
    # axis least aligned with n, ties broken by index
    k = int(np.argmin(np.abs(n)))
    a = np.zeros(3)
    a[k] = 1.0
    b1 = np.cross(n, a)
    b1 /= np.linalg.norm(b1)
    b2 = np.cross(n, b1)
    return np.column_stack([b1, b2])


def plane_boxplus(pl: Plane, delta) -> Plane:
    """Tangent update: 2 sphere-tangent coords for the normal, 1 for offset."""
    delta = np.asarray(delta, dtype=float)
    if delta.shape != (3,) or not np.all(np.isfinite(delta)):
        raise GeometryError("plane increment must be a finite 3-vector")
    v = sphere_tangent_basis(pl.normal) @ delta[:2]
    angle = np.linalg.norm(v)
    if angle < 1e-14:
        n = pl.normal + v
    else:
        n = np.cos(angle) * pl.normal + np.sin(angle) * v / angle
    n /= np.linalg.norm(n)
    return Plane(n, pl.offset + delta[2])


def plane_boxminus(a: Plane, b: Plane):
    """Tangent delta such that plane_boxplus(b, delta) ~= a (normals not antipodal)."""
    c = np.clip(float(b.normal @ a.normal), -1.0, 1.0)
    angle = np.arccos(c)
    if angle < 1e-12:
        v = np.zeros(3)
    else:
        perp = a.normal - c * b.normal
        v = angle * perp / np.linalg.norm(perp)
    B = sphere_tangent_basis(b.normal)
    return np.concatenate([B.T @ v, [a.offset - b.offset]])


def transform_plane(T: Pose, plane: Plane) -> Plane:
    """Express a plane in the parent frame of T in T's local frame.

    If x_parent = R x_local + t, a plane over parent points maps to
    (R^T n, d + n . t) over local points.
    """
    R = T.rotation_matrix
    n_local = R.T @ plane.normal
    d_local = plane.offset + float(plane.normal @ T.translation)
    return Plane(n_local, d_local)


# ---------------------------------------------------------------------------
# Lines
# ---------------------------------------------------------------------------

@dataclass
class PluckerLine:
    """3D line as (moment, direction) with moment . direction = 0."""

    moment: np.ndarray
    direction: np.ndarray

    def __post_init__(self):
        self.moment = np.asarray(self.moment, dtype=float).copy()
        self.direction = np.asarray(self.direction, dtype=float).copy()
        if np.linalg.norm(self.direction) < _EPS:
            raise DegenerateLineError("line direction must be nonzero")

    @staticmethod
    def from_points(p, q):
        p = np.asarray(p, dtype=float)
        q = np.asarray(q, dtype=float)
        d = q - p
        if np.linalg.norm(d) < _EPS:
            raise DegenerateLineError("coincident points do not define a line")
        return PluckerLine(np.cross(p, q), d)

    def klein_residual(self):
        return float(self.moment @ self.direction)

    def closest_point_to_origin(self):
        d2 = float(self.direction @ self.direction)
        return np.cross(self.direction, self.moment) / d2

    def point_at(self, s):
        return self.closest_point_to_origin() + s * self.direction


@dataclass
class OrthonormalLine:
    """Minimal 4-DoF line: SO(3) frame + SO(2) moment/direction balance."""

    frame: np.ndarray  # 3x3 rotation, columns [moment dir, line dir, cross]
    scale: np.ndarray  # 2x2 rotation

    def __post_init__(self):
        self.frame = np.asarray(self.frame, dtype=float).copy()
        self.scale = np.asarray(self.scale, dtype=float).copy()


def plucker_to_orthonormal(l: PluckerLine) -> OrthonormalLine:
    m, d = l.moment, l.direction
    nd = np.linalg.norm(d)
    if nd < _EPS:
        raise DegenerateLineError("zero direction")
    nm = np.linalg.norm(m)
    d_hat = d / nd
    if nm < 1e-12 * max(nd, 1.0):
        # line through the origin: complete the direction deterministically
        u1 = sphere_tangent_basis(d_hat)[:, 0]
        nm = 0.0
    else:
        u1 = m / nm
    u3 = np.cross(u1, d_hat)
    U = np.column_stack([u1, d_hat, u3])
    h = np.hypot(nm, nd)
    c, s = nm / h, nd / h
    W = np.array([[c, -s], [s, c]])
    return OrthonormalLine(U, W)


def orthonormal_to_plucker(o: OrthonormalLine) -> PluckerLine:
    c, s = o.scale[0, 0], o.scale[1, 0]
    m = c * o.frame[:, 0]
    d = s * o.frame[:, 1]
    if np.linalg.norm(d) < _EPS:
        raise DegenerateLineError("orthonormal line with zero direction component")
    return PluckerLine(m, d)


def orthonormal_boxplus(o: OrthonormalLine, delta) -> OrthonormalLine:
    """4-dim tangent: 3 for the SO(3) frame, 1 for the SO(2) balance."""
    delta = np.asarray(delta, dtype=float)
    if delta.shape != (4,) or not np.all(np.isfinite(delta)):
        raise GeometryError("line increment must be a finite 4-vector")
    U = o.frame @ so3_exp(delta[:3])
    c, s = np.cos(delta[3]), np.sin(delta[3])
    W = o.scale @ np.array([[c, -s], [s, c]])
    return OrthonormalLine(U, W)


def orthonormal_boxminus(a: OrthonormalLine, b: OrthonormalLine):
    dU = so3_log(b.frame.T @ a.frame)
    dW = b.scale.T @ a.scale
    return np.concatenate([dU, [np.arctan2(dW[1, 0], dW[0, 0])]])


def transform_line(T: Pose, l: PluckerLine) -> PluckerLine:
    """Map a line through the rigid transform x_out = R x + t."""
    R = T.rotation_matrix
    d = R @ l.direction
    m = R @ l.moment + np.cross(T.translation, d)
    return PluckerLine(m, d)


def line_from_dual_plucker(plane_a: Plane, plane_b: Plane,
                           parallel_tol: float = 1e-9) -> PluckerLine:
    """Intersection line of two planes via the dual Plucker matrix."""
    na, da = plane_a.normal, plane_a.offset
    nb, db = plane_b.normal, plane_b.offset
    direction = np.cross(nb, na)
    if np.linalg.norm(direction) < parallel_tol:
        raise DegenerateLineError("parallel planes have no intersection line")
    moment = db * na - da * nb
    return PluckerLine(moment, direction)
