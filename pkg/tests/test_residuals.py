"""Residual edges: reprojection, odometry, plane-distance terms, robust
losses, and analytic-vs-numeric Jacobian agreement."""

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from coplanar_ba.geometry import (
    CameraIntrinsics,
    PluckerLine,
    Pose,
    pose_boxplus,
    project,
    quat_exp,
)
from coplanar_ba.residuals import (
    BehindCameraError,
    EvalContext,
    PointReprojEdge,
    RobustLoss,
    line_residual,
    odometry_residual,
    point_residual,
    robust_weight,
)
from conftest import EDGE_FACTORIES, K_DEFAULT, check_edge_jacobians

K100 = CameraIntrinsics(100.0, 100.0, 50.0, 50.0)
K1 = CameraIntrinsics(1.0, 1.0, 0.0, 0.0)


def random_pose(rng, rot=0.5, trans=2.0):
    return Pose(quat_exp(rng.normal(size=3) * rot), rng.normal(size=3) * trans)


# ---------------------------------------------------------------------------
# point residual
# ---------------------------------------------------------------------------

def test_point_residual_zero_at_exact_projection():
    rng = np.random.default_rng(30)
    pose = random_pose(rng)
    x_w = pose.transform([0.2, -0.1, 3.0])
    measured = project(K_DEFAULT, pose.inverse().transform(x_w))
    assert np.allclose(point_residual(pose, x_w, K_DEFAULT, measured), 0.0,
                       atol=1e-12)


def test_point_residual_one_pixel_offset():
    x_cam = np.array([0.1, 0.2, 1.0])
    r = point_residual(Pose.identity(), x_cam, K100, (61.0, 70.0))
    assert np.allclose(r, [1.0, 0.0])


def test_point_residual_gauge_invariance():
    rng = np.random.default_rng(31)
    pose = random_pose(rng)
    x_w = pose.transform([0.3, 0.1, 4.0])
    measured = project(K_DEFAULT, pose.inverse().transform(x_w)) + [1.5, -0.5]
    base = point_residual(pose, x_w, K_DEFAULT, measured)
    for _ in range(100):
        G = random_pose(rng)
        r = point_residual(G.compose(pose), G.transform(x_w), K_DEFAULT, measured)
        assert np.allclose(r, base, atol=1e-8)


def test_point_residual_behind_camera():
    with pytest.raises(BehindCameraError):
        point_residual(Pose.identity(), [0.0, 0.0, -1.0], K_DEFAULT, (0.0, 0.0))


# ---------------------------------------------------------------------------
# line residual
# ---------------------------------------------------------------------------

def _horizon_line():
    # projects to the homogeneous image line (0, 1, 0), i.e. v = 0, under K1
    return PluckerLine.from_points([0.0, 0.0, 1.0], [1.0, 0.0, 1.0])


def test_line_residual_endpoint_distances_to_image_x_axis():
    r = line_residual(Pose.identity(), _horizon_line(), K1,
                      (np.array([1.0, 2.0]), np.array([3.0, -1.0])))
    assert np.allclose(r, [2.0, -1.0])


def test_line_residual_zero_for_endpoints_on_line():
    r = line_residual(Pose.identity(), _horizon_line(), K1,
                      (np.array([-2.0, 0.0]), np.array([5.0, 0.0])))
    assert np.allclose(r, 0.0, atol=1e-12)


def test_line_residual_scale_invariance():
    line = _horizon_line()
    eps = (np.array([1.0, 2.0]), np.array([3.0, -1.0]))
    base = line_residual(Pose.identity(), line, K1, eps)
    for lam in (0.1, 7.0, 1234.5):
        scaled = PluckerLine(line.moment * lam, line.direction * lam)
        assert np.allclose(line_residual(Pose.identity(), scaled, K1, eps),
                           base, atol=1e-10)


# ---------------------------------------------------------------------------
# odometry residual
# ---------------------------------------------------------------------------

def test_odometry_residual_consistent_triple_is_zero():
    rng = np.random.default_rng(32)
    a = random_pose(rng)
    b = random_pose(rng)
    r = odometry_residual(a, b, a.inverse().compose(b))
    assert np.allclose(r, 0.0, atol=1e-10)


def test_odometry_residual_translation_slot():
    a = Pose.identity()
    measured = Pose(np.array([1.0, 0, 0, 0]), np.array([1.0, 0.0, 0.0]))
    b = Pose(np.array([1.0, 0, 0, 0]), np.array([1.1, 0.0, 0.0]))
    r = odometry_residual(a, b, measured)
    # tangent ordering is [translation, rotation]
    assert np.allclose(r, [0.1, 0.0, 0.0, 0.0, 0.0, 0.0], atol=1e-12)


def test_odometry_residual_first_order_antisymmetry():
    # reversing the manifold difference (measurement minus estimate instead
    # of estimate minus measurement) negates the residual to first order
    from coplanar_ba.geometry import pose_boxminus
    rng = np.random.default_rng(33)
    for _ in range(50):
        a = random_pose(rng)
        measured = random_pose(rng, rot=0.2, trans=0.5)
        delta = rng.normal(0, 1e-4, 6)
        b = pose_boxplus(a.compose(measured), delta)
        rel = a.inverse().compose(b)
        r_fwd = odometry_residual(a, b, measured)
        assert np.allclose(r_fwd, pose_boxminus(rel, measured), atol=1e-12)
        r_rev = pose_boxminus(measured, rel)
        assert np.allclose(r_fwd, -r_rev, atol=1e-6)


# ---------------------------------------------------------------------------
# robust loss
# ---------------------------------------------------------------------------

def test_robust_weight_cauchy_at_zero():
    cost, w = robust_weight(RobustLoss("cauchy", 1.0), 0.0)
    assert cost == 0.0 and w == 1.0


def test_robust_weight_none_passthrough():
    cost, w = robust_weight(RobustLoss(), 4.0)
    assert cost == 4.0 and w == 1.0


def test_robust_weight_rejects_negative():
    with pytest.raises(ValueError):
        robust_weight(RobustLoss(), -1.0)


def test_robust_loss_rejects_bad_config():
    with pytest.raises(ValueError):
        RobustLoss("huber", 1.0)
    with pytest.raises(ValueError):
        RobustLoss("cauchy", 0.0)


def test_cauchy_cost_concave_and_below_identity():
    loss = RobustLoss("cauchy", 1.0)
    grid = np.geomspace(0.1, 100.0, 30)
    costs = np.array([robust_weight(loss, s)[0] for s in grid])
    assert np.all(costs < grid)
    # concavity: slope (IRLS weight) decreases along the grid
    weights = np.array([robust_weight(loss, s)[1] for s in grid])
    assert np.all(np.diff(weights) < 0)


@settings(max_examples=200, deadline=None)
@given(st.floats(1e-6, 1e6), st.floats(0.0, 1e6))
def test_cauchy_weight_bounds_and_cost_dominance(scale, s):
    cost, w = robust_weight(RobustLoss("cauchy", scale), s)
    assert 0.0 < w <= 1.0
    assert cost <= s + 1e-9 * max(s, 1.0)
    assert cost >= 0.0


# ---------------------------------------------------------------------------
# Jacobians (smoke-level; the full 200-state sweep runs in the acceptance
# suite)
# ---------------------------------------------------------------------------

@pytest.mark.parametrize("kind", sorted(EDGE_FACTORIES))
def test_edge_jacobians_match_finite_differences(kind):
    factory = EDGE_FACTORIES[kind]
    failures = []
    for seed in range(25):
        rng = np.random.default_rng(1000 + seed)
        edge, state = factory(rng)
        failures += check_edge_jacobians(edge, state)
    assert not failures, f"{kind}: {failures[:3]}"


def test_coplanar_point_edge_jacobian_is_plane_tangent_sized():
    rng = np.random.default_rng(34)
    edge, state = EDGE_FACTORIES["point_reproj_coplanar"](rng)
    _, jacs = edge.evaluate(EvalContext(state, K_DEFAULT))
    assert ("point", 0) not in jacs
    assert jacs[("plane", 0)].shape == (2, 3)


def test_point_edge_jacobian_nonzero_at_zero_residual():
    rng = np.random.default_rng(35)
    edge, state = EDGE_FACTORIES["point_reproj_euclidean"](rng)
    exact = project(
        K_DEFAULT,
        state[("pose", 0)].inverse().transform(state[("point", 0)].position))
    edge = PointReprojEdge(0, ("point", 0), exact)
    r, jacs = edge.evaluate(EvalContext(state, K_DEFAULT))
    assert np.allclose(r, 0.0, atol=1e-10)
    assert all(np.linalg.norm(J) > 1e-3 for J in jacs.values())


def test_cost_only_context_returns_no_jacobians():
    rng = np.random.default_rng(36)
    for kind, factory in EDGE_FACTORIES.items():
        edge, state = factory(rng)
        r_full, jacs = edge.evaluate(EvalContext(state, K_DEFAULT))
        r_cheap, empty = edge.evaluate(
            EvalContext(state, K_DEFAULT, want_jacobians=False))
        assert np.allclose(r_full, r_cheap), kind
        assert jacs and not empty, kind
