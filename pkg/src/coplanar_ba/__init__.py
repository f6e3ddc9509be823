"""Co-planar bundle adjustment: landmark parametrizations that replace
per-point and per-line variables with shared plane variables, plus a
Monte-Carlo benchmark comparing them against traditional parametrizations."""

from .config import PRESETS, SceneConfig, load_config, save_config, sequence_a, sequence_b
from .geometry import (
    CameraIntrinsics,
    OrthonormalLine,
    Plane,
    PluckerLine,
    Pose,
    backproject,
    orthonormal_to_plucker,
    plane_boxplus,
    plucker_to_orthonormal,
    pose_boxplus,
    project,
    transform_line,
)
from .parametrization import (
    CoPlanarLine,
    CoPlanarPoint,
    EuclideanPoint,
    InverseDepthPoint,
    coplanar_line_plucker,
    coplanar_point_position,
    depth_from_plane,
    landmark_tangent_dim,
    triangulate_line,
)
from .ransac import (
    PlanarCandidateSet,
    PlaneAssociation,
    RansacConfig,
    associate_new_landmarks,
    feature_plane_distance,
    fit_plane_ransac,
    gate_region,
)
from .residuals import RobustLoss, line_residual, odometry_residual, point_residual, robust_weight
from .simulator import (
    VARIANTS,
    VariantSpec,
    ate_rmse,
    build_problem,
    generate_scene,
    run_monte_carlo,
)
from .solver import (
    Problem,
    SolveReport,
    build_normal_equations,
    count_items_parameters,
    hessian_pattern,
    optimize,
    schur_solve,
)

__version__ = "0.1.0"
