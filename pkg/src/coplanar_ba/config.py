"""Scene / benchmark configuration with YAML serialization and the two
shipped simulation presets."""

from __future__ import annotations

import dataclasses
from dataclasses import dataclass, field
from typing import List, Optional

import yaml

from .geometry import CameraIntrinsics


@dataclass(frozen=True)
class WallSpec:
    """Axis-aligned feature wall: plane <axis> = offset, features sampled on
    the rectangle spanned by the remaining axes."""

    axis: str          # "y" or "z"
    offset: float      # meters
    u_range: tuple     # extent along x (meters)
    v_range: tuple     # extent along the remaining axis (meters)


@dataclass(frozen=True)
class RansacSettings:
    inlier_distance: float = 0.05
    consensus_fraction: float = 0.8
    max_iterations: int = 200
    min_features: int = 10


@dataclass(frozen=True)
class SceneConfig:
    name: str = "custom"
    n_points: int = 50
    n_lines: int = 20
    n_poses: int = 50
    # sinusoidal trajectory: forward along x, z = amplitude * sin(2 pi x / period)
    trajectory_length: float = 10.0
    trajectory_amplitude: float = 1.0
    trajectory_period: float = 10.0
    camera_orientation: str = "wall"  # "wall" (optical axis +y) or "forward" (+x)
    walls: tuple = (WallSpec("y", 5.0, (0.0, 10.0), (-2.0, 2.0)),)
    outlier_fraction: float = 0.0
    pixel_noise_sigma: float = 1.0
    odom_sigma_theta_deg: float = 1.0
    odom_sigma_p: float = 0.10
    plane_residual_sigma: float = 0.07  # '-r' point/line-to-plane residual stdev (m)
    # Cauchy scale (whitened units) for the '-r' plane terms; 0 disables.
    # The initial map is warped by integrated odometry drift, so these terms
    # start far from zero and need a robust loss to keep GN well behaved.
    plane_residual_robust_scale: float = 1.0
    fx: float = 460.0
    fy: float = 460.0
    cx: float = 320.0
    cy: float = 240.0
    image_width: int = 640
    image_height: int = 480
    min_depth: float = 0.5
    min_observations: int = 2     # resample features seen from fewer poses
    max_line_length: float = 2.5  # meters; keeps line endpoints co-visible
    rng_seed: int = 0
    ransac: RansacSettings = field(default_factory=RansacSettings)

    def __post_init__(self):
        if min(self.n_points, self.n_poses) <= 0 or self.n_lines < 0:
            raise ValueError("counts must be positive")
        if self.pixel_noise_sigma < 0 or self.odom_sigma_p < 0 or self.odom_sigma_theta_deg < 0:
            raise ValueError("noise sigmas must be non-negative")

    @property
    def intrinsics(self) -> CameraIntrinsics:
        return CameraIntrinsics(self.fx, self.fy, self.cx, self.cy)

    def to_dict(self) -> dict:
        d = dataclasses.asdict(self)
        d["walls"] = [dataclasses.asdict(w) if not isinstance(w, dict) else w
                      for w in self.walls]
        for w in d["walls"]:
            w["u_range"] = list(w["u_range"])
            w["v_range"] = list(w["v_range"])
        return d

    @staticmethod
    def from_dict(d: dict) -> "SceneConfig":
        d = dict(d)
        walls = tuple(
            WallSpec(w["axis"], float(w["offset"]),
                     tuple(w["u_range"]), tuple(w["v_range"]))
            for w in d.pop("walls", [])
        ) or SceneConfig().walls
        ransac = RansacSettings(**d.pop("ransac", {}))
        return SceneConfig(walls=walls, ransac=ransac, **d)


def save_config(cfg: SceneConfig, path) -> None:
    with open(path, "w") as fh:
        yaml.safe_dump({"scene": cfg.to_dict()}, fh, sort_keys=False)


def load_config(path) -> SceneConfig:
    with open(path) as fh:
        data = yaml.safe_load(fh)
    if not isinstance(data, dict) or "scene" not in data:
        raise ValueError(f"{path}: expected a top-level 'scene' section")
    return SceneConfig.from_dict(data["scene"])


def sequence_b() -> SceneConfig:
    """50 points and 20 lines on one wall, 50 poses."""
    return SceneConfig(
        name="sequence_b",
        n_points=50, n_lines=20, n_poses=50,
        trajectory_length=10.0,
        camera_orientation="wall",
        walls=(WallSpec("y", 5.0, (0.0, 10.0), (-2.0, 2.0)),),
        min_observations=8,
        # generous gate: candidates come from ground-truth regions and the
        # initial map is warped by integrated odometry noise
        ransac=RansacSettings(inlier_distance=2.5, min_features=10),
    )


def sequence_a() -> SceneConfig:
    """200 points and 100 lines in 4 wall directions, 150 poses."""
    return SceneConfig(
        name="sequence_a",
        n_points=200, n_lines=100, n_poses=150,
        trajectory_length=30.0,
        camera_orientation="forward",
        walls=(
            WallSpec("y", 5.0, (5.0, 40.0), (-2.0, 3.0)),
            WallSpec("y", -5.0, (5.0, 40.0), (-2.0, 3.0)),
            WallSpec("z", 4.0, (5.0, 40.0), (-3.0, 3.0)),
            WallSpec("z", -3.0, (5.0, 40.0), (-3.0, 3.0)),
        ),
        min_observations=4,
        ransac=RansacSettings(inlier_distance=2.5, min_features=10),
    )


PRESETS = {"sequence_a": sequence_a, "sequence_b": sequence_b}
