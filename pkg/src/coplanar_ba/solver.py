"""Sparse-block Gauss-Newton / Levenberg-Marquardt with Schur elimination of
landmark and plane blocks, plus parameter accounting and Hessian-structure
reporting."""

from __future__ import annotations

import dataclasses
import time
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Tuple

import numpy as np

from .geometry import (
    CameraIntrinsics,
    OrthonormalLine,
    Plane,
    Pose,
    orthonormal_boxplus,
    plane_boxplus,
    pose_boxplus,
)
from .parametrization import (
    CoPlanarLine,
    CoPlanarPoint,
    EuclideanPoint,
    InverseDepthPoint,
    RayParallelToPlaneError,
    landmark_tangent_dim,
)
from .residuals import (
    BehindCameraError,
    EvalContext,
    LinePlaneEdge,
    LineReprojEdge,
    PointPlaneEdge,
    PointReprojEdge,
    RobustLoss,
    robust_weight,
)


class EmptyProblemError(RuntimeError):
    """No edge could be evaluated at the given state."""


class RankDeficientError(RuntimeError):
    """Reduced camera system is singular."""


class InvalidInitializationError(RuntimeError):
    """Non-finite cost at the initial state."""


def tangent_dim(value) -> int:
    if isinstance(value, Pose):
        return 6
    if isinstance(value, Plane):
        return 3
    return landmark_tangent_dim(value)


def value_boxplus(value, delta):
    if isinstance(value, Pose):
        return pose_boxplus(value, delta)
    if isinstance(value, Plane):
        return plane_boxplus(value, delta)
    if isinstance(value, OrthonormalLine):
        return orthonormal_boxplus(value, delta)
    if isinstance(value, EuclideanPoint):
        return EuclideanPoint(value.position + delta)
    if isinstance(value, InverseDepthPoint):
        return dataclasses.replace(value, inverse_depth=value.inverse_depth + float(delta[0]))
    raise TypeError(f"no tangent update for {type(value).__name__}")


@dataclass
class Problem:
    """Variable blocks + residual edges + robust-loss settings.

    `state` maps block keys to manifold values. Co-planar landmarks live in
    the state (edges need their anchors) but contribute no variable block.
    Gauge must be pinned either by fixing a pose or through a prior edge.
    """

    K: CameraIntrinsics
    state: Dict
    edges: List = field(default_factory=list)
    fixed: set = field(default_factory=set)
    loss: RobustLoss = field(default_factory=RobustLoss)
    plane_loss: RobustLoss = field(default_factory=RobustLoss)

    def free_blocks(self) -> List[Tuple]:
        keys = []
        for key, value in self.state.items():
            if key in self.fixed:
                continue
            if tangent_dim(value) > 0:
                keys.append(key)
        return keys

    def variable_blocks(self) -> List[Tuple]:
        """All optimizable blocks regardless of the gauge fix."""
        return [k for k, v in self.state.items() if tangent_dim(v) > 0]


def _edge_loss(problem: Problem, edge) -> RobustLoss:
    if isinstance(edge, (PointReprojEdge, LineReprojEdge)):
        return problem.loss
    if isinstance(edge, (PointPlaneEdge, LinePlaneEdge)):
        # plane-membership terms start far from zero when the initial map is
        # warped by odometry drift; a robust loss keeps them from dominating
        return problem.plane_loss
    return RobustLoss()


def build_index_map(problem: Problem) -> Tuple[Dict, int]:
    index = {}
    offset = 0
    for key in problem.free_blocks():
        dim = tangent_dim(problem.state[key])
        index[key] = slice(offset, offset + dim)
        offset += dim
    return index, offset


def evaluate_cost(problem: Problem, state: Dict) -> Tuple[float, int]:
    """(robust whitened cost, number of skipped edges)."""
    ctx = EvalContext(state, problem.K, want_jacobians=False)
    cost = 0.0
    skipped = 0
    evaluated = 0
    for edge in problem.edges:
        try:
            r, _ = edge.evaluate(ctx)
        except (BehindCameraError, RayParallelToPlaneError):
            skipped += 1
            continue
        s = float(r @ edge.information @ r)
        c, _ = robust_weight(_edge_loss(problem, edge), s)
        cost += c
        evaluated += 1
    if evaluated == 0:
        raise EmptyProblemError("no evaluable edges")
    return cost, skipped


def build_normal_equations(problem: Problem, state: Dict):
    """Assemble H = sum J^T w L J and g = -sum J^T w L r over evaluable edges.

    Returns (H, g, cost, index_map, skipped).
    """
    index, n = build_index_map(problem)
    H = np.zeros((n, n))
    g = np.zeros(n)
    cost = 0.0
    skipped = 0
    evaluated = 0
    ctx = EvalContext(state, problem.K)
    for edge in problem.edges:
        try:
            r, jacs = edge.evaluate(ctx)
        except (BehindCameraError, RayParallelToPlaneError):
            skipped += 1
            continue
        evaluated += 1
        info = edge.information
        s = float(r @ info @ r)
        c, w = robust_weight(_edge_loss(problem, edge), s)
        cost += c
        items = [(index[k], J) for k, J in jacs.items() if k in index]
        # one stacked product per edge, then scatter the dense sub-blocks
        Jcat = np.concatenate([J for _, J in items], axis=1)
        wl_J = (w * info) @ Jcat
        A = Jcat.T @ wl_J
        b = wl_J.T @ r
        off_i = 0
        for sl_i, Ji in items:
            wi = Ji.shape[1]
            g[sl_i] -= b[off_i:off_i + wi]
            off_j = 0
            for sl_j, Jj in items:
                wj = Jj.shape[1]
                H[sl_i, sl_j] += A[off_i:off_i + wi, off_j:off_j + wj]
                off_j += wj
            off_i += wi
    if evaluated == 0:
        raise EmptyProblemError("no evaluable edges")
    return H, g, cost, index, skipped


def elimination_indices(problem: Problem, index: Dict) -> np.ndarray:
    """Scalar indices of landmark + plane blocks (the Schur-eliminated set)."""
    mask = np.zeros(max((sl.stop for sl in index.values()), default=0), dtype=bool)
    for key, sl in index.items():
        if key[0] != "pose":
            mask[sl] = True
    return mask


def schur_solve(H: np.ndarray, g: np.ndarray, elim_mask: np.ndarray) -> np.ndarray:
    """Solve H step = g by eliminating the masked blocks first."""
    step, _, _ = _schur_solve_timed(H, g, elim_mask)
    return step


def _schur_solve_timed(H: np.ndarray, g: np.ndarray, elim_mask: np.ndarray):
    """(step, schur_seconds, solve_seconds)."""
    n = H.shape[0]
    step = np.empty(n)
    keep = ~elim_mask
    if not elim_mask.any():
        t0 = time.perf_counter()
        step = _chol_solve(H, g)
        return step, 0.0, time.perf_counter() - t0
    t0 = time.perf_counter()
    Hee = H[np.ix_(elim_mask, elim_mask)]
    Hpe = H[np.ix_(keep, elim_mask)]
    Hpp = H[np.ix_(keep, keep)]
    ge = g[elim_mask]
    gp = g[keep]
    try:
        Hee_inv_Hep = np.linalg.solve(Hee, Hpe.T)
        Hee_inv_ge = np.linalg.solve(Hee, ge)
    except np.linalg.LinAlgError as exc:
        raise RankDeficientError("eliminated block is singular") from exc
    S = Hpp - Hpe @ Hee_inv_Hep
    rhs = gp - Hpe @ Hee_inv_ge
    t1 = time.perf_counter()
    step_p = _chol_solve(S, rhs)
    step_e = Hee_inv_ge - Hee_inv_Hep @ step_p
    t2 = time.perf_counter()
    step[keep] = step_p
    step[elim_mask] = step_e
    return step, t1 - t0, t2 - t1


def _chol_solve(A: np.ndarray, b: np.ndarray) -> np.ndarray:
    if A.size == 0:
        return np.zeros(0)
    try:
        L = np.linalg.cholesky(A)
    except np.linalg.LinAlgError as exc:
        raise RankDeficientError("reduced camera system not positive definite") from exc
    y = np.linalg.solve(L, b)
    return np.linalg.solve(L.T, y)


def apply_step(problem: Problem, state: Dict, step: np.ndarray, index: Dict) -> Dict:
    new_state = dict(state)
    for key, sl in index.items():
        new_state[key] = value_boxplus(state[key], step[sl])
    return new_state


@dataclass
class SolveReport:
    iterations: int = 0
    initial_cost: float = np.nan
    final_cost: float = np.nan
    costs: List[float] = field(default_factory=list)
    time_linearize: float = 0.0
    time_schur: float = 0.0
    time_solve: float = 0.0
    time_update: float = 0.0
    item_count: int = 0
    parameter_count: int = 0
    converged: bool = False
    skipped_edges: int = 0

    @property
    def optimization_time(self) -> float:
        return self.time_linearize + self.time_schur + self.time_solve + self.time_update


def count_items_parameters(problem: Problem) -> Tuple[int, int]:
    """Problem-size accounting: (#variable blocks, total tangent dimension).

    Counts every optimizable block (pose 6, Euclidean point 3, inverse-depth
    point 1, line 4, plane 3); co-planar landmarks contribute nothing.
    """
    items = 0
    parameters = 0
    for key in problem.variable_blocks():
        items += 1
        parameters += tangent_dim(problem.state[key])
    return items, parameters


def optimize(problem: Problem, state: Dict, max_iterations: int = 10,
             mode: str = "gn", rel_tol: float = 1e-6,
             lm_initial_lambda: float = 1e-4) -> Tuple[Dict, SolveReport]:
    """Run Gauss-Newton or Levenberg-Marquardt for a fixed iteration budget."""
    if mode not in ("gn", "lm"):
        raise ValueError(f"unknown mode {mode!r}")
    report = SolveReport()
    report.item_count, report.parameter_count = count_items_parameters(problem)
    cost, skipped = evaluate_cost(problem, state)
    if not np.isfinite(cost):
        raise InvalidInitializationError("non-finite cost at initial state")
    report.initial_cost = cost
    report.final_cost = cost
    report.costs.append(cost)
    report.skipped_edges = skipped
    lam = lm_initial_lambda

    for _ in range(max_iterations):
        t0 = time.perf_counter()
        H, g, cost_at_lin, index, skipped = build_normal_equations(problem, state)
        t1 = time.perf_counter()
        report.time_linearize += t1 - t0
        report.skipped_edges = skipped

        elim = elimination_indices(problem, index)
        if mode == "gn":
            try:
                step, t_schur, t_solve = _schur_solve_timed(H, g, elim)
            except RankDeficientError:
                # retry with mild damping, standard fallback
                step, t_schur, t_solve = _schur_solve_timed(
                    H + 1e-8 * np.eye(H.shape[0]), g, elim)
            report.time_schur += t_schur
            report.time_solve += t_solve
            t4 = time.perf_counter()
            new_state = apply_step(problem, state, step, index)
            report.time_update += time.perf_counter() - t4
            new_cost, _ = evaluate_cost(problem, new_state)
            state = new_state
            report.iterations += 1
            report.costs.append(new_cost)
            rel = (cost_at_lin - new_cost) / max(abs(cost_at_lin), 1e-30)
            report.final_cost = new_cost
            if new_cost < 1e-14 or abs(rel) < rel_tol:
                report.converged = True
                break
        else:  # LM
            accepted = False
            for _ in range(12):
                t2 = time.perf_counter()
                damped = H + lam * np.diag(np.maximum(np.diag(H), 1e-12))
                try:
                    step = schur_solve(damped, g, elim)
                except RankDeficientError:
                    lam *= 10.0
                    continue
                t3 = time.perf_counter()
                report.time_solve += t3 - t2
                candidate = apply_step(problem, state, step, index)
                new_cost, _ = evaluate_cost(problem, candidate)
                if np.isfinite(new_cost) and new_cost <= cost_at_lin:
                    state = candidate
                    lam = max(lam / 3.0, 1e-12)
                    accepted = True
                    break
                lam *= 10.0
            report.iterations += 1
            if not accepted:
                report.converged = True
                break
            report.costs.append(new_cost)
            rel = (cost_at_lin - new_cost) / max(abs(cost_at_lin), 1e-30)
            report.final_cost = new_cost
            if new_cost < 1e-14 or rel < rel_tol:
                report.converged = True
                break
    return state, report


# ---------------------------------------------------------------------------
# Hessian structure
# ---------------------------------------------------------------------------

@dataclass
class HessianPattern:
    block_keys: List[Tuple]
    block_dims: List[int]
    pairs: set  # (i, j) block index pairs, symmetric

    @property
    def total_dim(self) -> int:
        return sum(self.block_dims)

    def scalar_entries(self):
        offsets = np.concatenate([[0], np.cumsum(self.block_dims)])
        for i, j in sorted(self.pairs):
            for r in range(offsets[i], offsets[i + 1]):
                for c in range(offsets[j], offsets[j + 1]):
                    yield r, c

    def nonzero_scalars(self) -> int:
        return sum(self.block_dims[i] * self.block_dims[j] for i, j in self.pairs)

    def offdiagonal_scalars(self) -> int:
        return sum(self.block_dims[i] * self.block_dims[j]
                   for i, j in self.pairs if i != j)


def hessian_pattern(problem: Problem) -> HessianPattern:
    keys = problem.variable_blocks()
    key_index = {k: i for i, k in enumerate(keys)}
    dims = [tangent_dim(problem.state[k]) for k in keys]
    pairs = set()
    for edge in problem.edges:
        incident = [key_index[k] for k in edge.blocks(problem.state) if k in key_index]
        for i in incident:
            for j in incident:
                pairs.add((i, j))
    return HessianPattern(keys, dims, pairs)


def write_pattern(path, pattern: HessianPattern) -> None:
    """Text export: header 'rows cols', then one 'row col' line per
    structurally nonzero scalar entry."""
    n = pattern.total_dim
    with open(path, "w") as fh:
        fh.write(f"{n} {n}\n")
        for r, c in pattern.scalar_entries():
            fh.write(f"{r} {c}\n")


def read_pattern(path):
    """((rows, cols), entries array) from the text export format."""
    with open(path) as fh:
        header = fh.readline().split()
        rows, cols = int(header[0]), int(header[1])
        entries = []
        for line in fh:
            line = line.strip()
            if not line:
                continue
            r, c = line.split()
            entries.append((int(r), int(c)))
    return (rows, cols), np.array(entries, dtype=int).reshape(-1, 2)
