"""Landmark representations and conversions between observations, planes
and 3D landmarks.

A co-planar landmark carries no free parameters of its own: its 3D position
(or supporting line) is a pure function of the shared plane variable, the
anchor camera pose and the fixed anchor pixel measurement.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Tuple, Union

import numpy as np

from .geometry import (
    CameraIntrinsics,
    DegenerateLineError,
    GeometryError,
    Plane,
    PluckerLine,
    Pose,
    backproject,
    line_from_dual_plucker,
    transform_line,
    transform_plane,
)


class RayParallelToPlaneError(GeometryError):
    """Viewing ray is (numerically) parallel to the target plane."""


class LowParallaxError(GeometryError):
    """Triangulation rejected for lack of parallax."""


@dataclass(frozen=True)
class EuclideanPoint:
    position: np.ndarray  # 3-vector, world frame


@dataclass(frozen=True)
class InverseDepthPoint:
    anchor_frame: int
    anchor_pixel: np.ndarray  # pixels
    inverse_depth: float  # 1/m, > 0 for valid points


@dataclass(frozen=True)
class CoPlanarPoint:
    plane_id: int
    anchor_frame: int
    anchor_pixel: np.ndarray


@dataclass(frozen=True)
class CoPlanarLine:
    plane_id: int
    anchor_frame: int
    anchor_endpoints: Tuple[np.ndarray, np.ndarray]


# OrthonormalLine lives in geometry; re-exported via the union for clarity.
from .geometry import OrthonormalLine  # noqa: E402

LandmarkParam = Union[EuclideanPoint, InverseDepthPoint, OrthonormalLine,
                      CoPlanarPoint, CoPlanarLine]

_TANGENT_DIMS = {
    EuclideanPoint: 3,
    InverseDepthPoint: 1,
    OrthonormalLine: 4,
    CoPlanarPoint: 0,
    CoPlanarLine: 0,
}


def landmark_tangent_dim(p: LandmarkParam) -> int:
    """Free parameters a landmark contributes to the optimization.

    Co-planar landmarks contribute 0: all their freedom lives in the 3-DoF
    plane block.
    """
    return _TANGENT_DIMS[type(p)]


def depth_from_plane(plane_in_camera: Plane, K: CameraIntrinsics, pixel) -> float:
    """Depth h at which the viewing ray of `pixel` meets the plane.

    Solves h * n^T K^-1 (u, v, 1)^T + d = 0 for h.
    """
    ray = backproject(K, pixel)
    denom = float(plane_in_camera.normal @ ray)
    if abs(denom) < 1e-9:
        raise RayParallelToPlaneError("viewing ray parallel to plane")
    return -plane_in_camera.offset / denom


def coplanar_point_position(p: CoPlanarPoint, plane_world: Plane,
                            anchor_pose: Pose, K: CameraIntrinsics) -> np.ndarray:
    """World position of a co-planar point (plane, anchor pose, pixel)."""
    plane_cam = transform_plane(anchor_pose, plane_world)
    h = depth_from_plane(plane_cam, K, p.anchor_pixel)
    return anchor_pose.transform(h * backproject(K, p.anchor_pixel))


def backprojection_plane(pose: Pose, K: CameraIntrinsics, endpoints) -> Plane:
    """World-frame plane through the camera center and two observed endpoints.

    Normalized to unit normal; the offset follows from passing through the
    camera center.
    """
    r1 = backproject(K, endpoints[0])
    r2 = backproject(K, endpoints[1])
    n_cam = np.cross(r1, r2)
    norm = np.linalg.norm(n_cam)
    if norm < 1e-12:
        raise DegenerateLineError("coincident endpoints give no back-projection plane")
    n_world = pose.rotation_matrix @ (n_cam / norm)
    d = -float(n_world @ pose.translation)
    return Plane(n_world, d)


def coplanar_line_plucker(l: CoPlanarLine, plane_world: Plane,
                          anchor_pose: Pose, K: CameraIntrinsics) -> PluckerLine:
    """World line of a co-planar line: intersection of its back-projection
    plane with the landmark plane via the dual Plucker matrix."""
    pi_l = backprojection_plane(anchor_pose, K, l.anchor_endpoints)
    return line_from_dual_plucker(pi_l, plane_world, parallel_tol=1e-9)


def inverse_depth_position(p: InverseDepthPoint, anchor_pose: Pose,
                           K: CameraIntrinsics) -> np.ndarray:
    if p.inverse_depth <= 0:
        raise GeometryError("inverse depth must be positive")
    return anchor_pose.transform(backproject(K, p.anchor_pixel) / p.inverse_depth)


def triangulate_line(endpoints_a, pose_a: Pose, endpoints_b, pose_b: Pose,
                     K: CameraIntrinsics, min_angle: float = 1e-4) -> PluckerLine:
    """Triangulate a 3D line as the intersection of two back-projection planes."""
    plane_a = backprojection_plane(pose_a, K, endpoints_a)
    plane_b = backprojection_plane(pose_b, K, endpoints_b)
    cross = np.cross(plane_a.normal, plane_b.normal)
    if np.linalg.norm(cross) < min_angle:
        raise LowParallaxError("back-projection planes nearly parallel")
    return line_from_dual_plucker(plane_a, plane_b)


def triangulate_point(pixels, poses, K: CameraIntrinsics) -> np.ndarray:
    """Linear multi-view triangulation (midpoint least squares over rays)."""
    A = np.zeros((3, 3))
    b = np.zeros(3)
    for px, pose in zip(pixels, poses):
        d = pose.rotation_matrix @ backproject(K, px)
        d = d / np.linalg.norm(d)
        P = np.eye(3) - np.outer(d, d)
        A += P
        b += P @ pose.translation
    if np.linalg.cond(A) > 1e12:
        raise LowParallaxError("rays nearly parallel; point not triangulable")
    return np.linalg.solve(A, b)
