"""Motion estimation: residual-flow least squares solved by Gauss-Newton.

Per-pixel residuals follow e_k(xi_i, xi_j) = r_k - [pi(exp(xi_j) G_j
(exp(xi_i) G_i)^-1 X_k) - pi(G_ij X_k)] with X_k backprojected from frame
i. Jacobians are taken of e itself (so the ``j`` block carries a minus
sign) and the step solves xi = -(J^T W J)^-1 J^T W e; this is the
convention under which finite differences of e validate J and the step
descends the weighted objective.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

from . import kernels
from .camera import (EPS_Z, Intrinsics, backproject_many, project_many,
                     projection_jacobian_many)
from .errors import (DimensionMismatch, InsufficientConstraints,
                     NotPositiveDefinite)
from .lie import Pose, action_jacobian_many, adjoint, exp_se3
from .maps import DepthMap, FeatureMap
from .sampler import warp_feature_map

# confidence range of the deterministic estimators
CONF_FLOOR = 0.01
CONF_CEIL = 0.99

FlowEstimator = Callable[[int, int, Pose, DepthMap], "ResidualFlowField"]


@dataclass
class ResidualFlowField:
    """Dense per-pixel 2D flow correction with (0,1) confidences."""

    flow: np.ndarray        # (H, W, 2)
    confidence: np.ndarray  # (H, W, 2)
    valid: np.ndarray       # (H, W)

    def __post_init__(self):
        if self.flow.shape[:2] != self.valid.shape or self.flow.shape != self.confidence.shape:
            raise DimensionMismatch("flow field component shapes differ")


@dataclass
class FramePairResiduals:
    """Sparse per-pixel records for one (i, j) frame pair."""

    i: int
    j: int
    pixels: np.ndarray   # (N, 2)
    depths: np.ndarray   # (N,)
    flow: np.ndarray     # (N, 2)
    weights: np.ndarray  # (N, 2)
    points: np.ndarray   # (N, 3), backprojected in camera i


@dataclass
class NormalSystem:
    """Normal equations H xi = -b over the free pose blocks."""

    h: np.ndarray
    b: np.ndarray
    block_of: dict  # frame index -> block index


def pair_from_flow(i: int, j: int, field: ResidualFlowField, depth_i: DepthMap,
                   k: Intrinsics) -> FramePairResiduals:
    """Collect the valid-pixel records for a frame pair."""
    mask = field.valid & depth_i.valid
    vs, us = np.nonzero(mask)
    pixels = np.stack([us, vs], axis=-1).astype(np.float64)
    depths = depth_i.values[vs, us]
    points = backproject_many(k, pixels, depths)
    return FramePairResiduals(i, j, pixels, depths, field.flow[vs, us],
                              field.confidence[vs, us], points)


def relative_pose(poses: Sequence[Pose], i: int, j: int) -> Pose:
    return poses[j].compose(poses[i].inverse())


def residual_at(pair: FramePairResiduals, poses: Sequence[Pose], k: Intrinsics,
                xi_i: np.ndarray, xi_j: np.ndarray):
    """Evaluate e_k at given twist increments; returns (e (N, 2), valid).

    Used by the finite-difference oracles; at zero increments the bracket
    cancels bit-exactly and e equals the residual flow.
    """
    g_ref = relative_pose(poses, pair.i, pair.j)
    g_new = (exp_se3(xi_j).compose(poses[pair.j])).compose(
        (exp_se3(xi_i).compose(poses[pair.i])).inverse())
    uv_new, ok_new = project_many(k, g_new.transform(pair.points))
    uv_ref, ok_ref = project_many(k, g_ref.transform(pair.points))
    e = pair.flow - (uv_new - uv_ref)
    return e, ok_new & ok_ref


@dataclass
class PairLinearization:
    """Residuals and d(e)/d(xi) blocks at xi = 0 for one pair."""

    pair: FramePairResiduals
    e: np.ndarray       # (N, 2)
    j_j: np.ndarray     # (N, 2, 6): d e / d xi_j
    j_i: np.ndarray     # (N, 2, 6): d e / d xi_i
    valid: np.ndarray   # (N,) cheirality of the transformed points


def linearize(pair: FramePairResiduals, poses: Sequence[Pose],
              k: Intrinsics) -> PairLinearization:
    g_ij = relative_pose(poses, pair.i, pair.j)
    y = g_ij.transform(pair.points)
    valid = y[:, 2] > EPS_Z
    dpi = projection_jacobian_many(k, y)
    a = dpi @ action_jacobian_many(y)  # (N, 2, 6)
    j_j = -a
    j_i = a @ adjoint(g_ij)
    # at zero increments the bracket in e_k vanishes identically
    e = pair.flow.copy()
    return PairLinearization(pair, e, j_j, j_i, valid)


def global_pairs(n: int) -> list[tuple[int, int]]:
    """Unordered all-pairs set for global optimization."""
    return [(i, j) for i in range(n) for j in range(i + 1, n)]


def keyframe_pairs(n: int, keyframe: int = 0) -> list[tuple[int, int]]:
    return [(keyframe, j) for j in range(n) if j != keyframe]


def assemble_system(lins: Sequence[PairLinearization], free: Sequence[int]
                    ) -> NormalSystem:
    """Accumulate H = sum J^T W J and b = sum J^T W e over the free blocks.

    Accumulation order is fixed (pair order, then block) for determinism.
    Raises InsufficientConstraints when any free block sees < 6 valid pixels.
    """
    block_of = {f: bi for bi, f in enumerate(free)}
    m = len(block_of)
    h = np.zeros((6 * m, 6 * m))
    b = np.zeros(6 * m)
    support = {f: 0 for f in free}
    for lin in lins:
        w = np.where(lin.valid[:, None], lin.pair.weights, 0.0)
        e = lin.e
        blocks = []
        if lin.pair.j in block_of:
            blocks.append((block_of[lin.pair.j], lin.j_j))
            support[lin.pair.j] += int(lin.valid.sum())
        if lin.pair.i in block_of:
            blocks.append((block_of[lin.pair.i], lin.j_i))
            support[lin.pair.i] += int(lin.valid.sum())
        for bi, ji in blocks:
            for bj, jj in blocks:
                h[6 * bi:6 * bi + 6, 6 * bj:6 * bj + 6] += np.einsum(
                    "nri,nr,nrj->ij", ji, w, jj)
            b[6 * bi:6 * bi + 6] += np.einsum("nri,nr,nr->i", ji, w, e)
    short = [f for f, n in support.items() if n < 6]
    if short:
        raise InsufficientConstraints(f"pose blocks {short} have < 6 valid pixels")
    return NormalSystem(h, b, block_of)


def gauss_newton_step(sys: NormalSystem, damping: float = 0.0) -> np.ndarray:
    """Solve (H + damping I) xi = -b by Cholesky."""
    h = sys.h
    if damping > 0:
        h = h + damping * np.eye(h.shape[0])
    try:
        chol = np.linalg.cholesky(h)
    except np.linalg.LinAlgError as err:
        raise NotPositiveDefinite(str(err)) from err
    xi = -np.linalg.solve(h, sys.b)
    del chol
    return xi


def solve_with_escalation(sys: NormalSystem, damping: float = 0.0,
                          retries: int = 4) -> np.ndarray:
    """gauss_newton_step with x10 damping escalation on Cholesky failure."""
    lam = damping
    for attempt in range(retries + 1):
        try:
            return gauss_newton_step(sys, lam)
        except NotPositiveDefinite:
            if attempt == retries:
                raise
            lam = lam * 10.0 if lam > 0 else 1e-8 * max(np.trace(sys.h), 1.0)
    raise AssertionError("unreachable")


def backward_solve(h: np.ndarray, xi: np.ndarray, dl_dxi: np.ndarray
                   ) -> tuple[np.ndarray, np.ndarray]:
    """Gradients of the Cholesky solve x = H^-1 b.

    dL/db = H^-T dL/dx; dL/dH = -(H^-T dL/dx) x^T, treating H entries as
    independent (finite-difference convention).
    """
    try:
        np.linalg.cholesky(h)
    except np.linalg.LinAlgError as err:
        raise NotPositiveDefinite(str(err)) from err
    dl_db = np.linalg.solve(h.T, dl_dxi)
    dl_dh = -np.outer(dl_db, xi)
    return dl_dh, dl_db


def initialize_poses(n: int) -> list[Pose]:
    """Identity initialization; the keyframe pose is the identity by definition."""
    return [Pose.identity() for _ in range(n)]


def update_poses(poses: Sequence[Pose], depths: dict, k: Intrinsics,
                 estimator: FlowEstimator, mode: str = "keyframe",
                 iterations: int = 1, damping: float = 0.0, keyframe: int = 0,
                 fixed: Sequence[int] | None = None) -> list[Pose]:
    """Run Gauss-Newton iterations of the motion objective.

    Each iteration re-estimates residual flow at the current poses,
    assembles the normal equations per mode, solves, and applies
    G <- exp(xi) G to the free poses.
    """
    poses = list(poses)
    n = len(poses)
    if mode == "keyframe":
        pairs = keyframe_pairs(n, keyframe)
        fixed_set = {keyframe}
    elif mode == "global":
        pairs = global_pairs(n)
        fixed_set = set(fixed) if fixed is not None else {keyframe}
    else:
        raise ValueError(f"unknown mode {mode!r}")
    free = [f for f in range(n) if f not in fixed_set]
    for _ in range(iterations):
        lins = []
        for (i, j) in pairs:
            g_ij = relative_pose(poses, i, j)
            field = estimator(i, j, g_ij, depths[i])
            pair = pair_from_flow(i, j, field, depths[i], k)
            lins.append(linearize(pair, poses, k))
        if mode == "keyframe":
            # block-diagonal by construction: solve each frame independently
            for lin in lins:
                sys = assemble_system([lin], [lin.pair.j])
                xi = solve_with_escalation(sys, damping)
                poses[lin.pair.j] = exp_se3(xi).compose(poses[lin.pair.j])
        else:
            sys = assemble_system(lins, free)
            xi = solve_with_escalation(sys, damping)
            for f, bi in sys.block_of.items():
                poses[f] = exp_se3(xi[6 * bi:6 * bi + 6]).compose(poses[f])
    return poses


def evaluate_objective(poses: Sequence[Pose], depths: dict, k: Intrinsics,
                       estimator: FlowEstimator, mode: str = "keyframe",
                       keyframe: int = 0) -> float:
    """Weighted objective E = sum w e^2 with flow re-estimated at the poses."""
    n = len(poses)
    pairs = keyframe_pairs(n, keyframe) if mode == "keyframe" else global_pairs(n)
    total = 0.0
    for (i, j) in pairs:
        g_ij = relative_pose(poses, i, j)
        field = estimator(i, j, g_ij, depths[i])
        pair = pair_from_flow(i, j, field, depths[i], k)
        total += float(np.sum(pair.weights * pair.flow ** 2))
    return total


# ---------------------------------------------------------------------------
# deterministic residual-flow estimators


def patch_flow(f_i: FeatureMap, f_j_warped: FeatureMap,
               valid: np.ndarray | None = None, patch_radius: int = 2,
               search_radius: int = 4) -> ResidualFlowField:
    """ZNCC patch matching with parabolic sub-pixel refinement.

    Flow at x is the displacement from x to the best-matching location in
    the warped map; confidence maps normalized peak sharpness into (0,1).
    """
    if f_i.data.shape != f_j_warped.data.shape:
        raise DimensionMismatch("feature maps differ in shape")
    h, w = f_i.height, f_i.width
    s = search_radius
    scores, cell_ok = kernels.zncc_scores(f_i.data, f_j_warped.data,
                                          patch_radius, s)
    flat = np.where(cell_ok, scores, -np.inf).reshape(h, w, -1)
    best = flat.argmax(axis=-1)
    dy = best // (2 * s + 1) - s
    dx = best % (2 * s + 1) - s
    vv, uu = np.mgrid[0:h, 0:w]
    c0 = flat[vv, uu, best]

    def neighbor(du, dv):
        yy = np.clip(dy + s + dv, 0, 2 * s)
        xx = np.clip(dx + s + du, 0, 2 * s)
        vals = scores[vv, uu, yy, xx]
        ok = cell_ok[vv, uu, yy, xx] & ((dy + dv >= -s) & (dy + dv <= s)
                                        & (dx + du >= -s) & (dx + du <= s))
        return np.where(ok, vals, c0)

    cl, cr = neighbor(-1, 0), neighbor(1, 0)
    cu, cd = neighbor(0, -1), neighbor(0, 1)
    denom_u = cl - 2.0 * c0 + cr
    denom_v = cu - 2.0 * c0 + cd
    ref_u = np.where(denom_u < -1e-12, 0.5 * (cl - cr) / denom_u, 0.0)
    ref_v = np.where(denom_v < -1e-12, 0.5 * (cu - cd) / denom_v, 0.0)
    ref_u = np.clip(ref_u, -0.5, 0.5)
    ref_v = np.clip(ref_v, -0.5, 0.5)

    flow = np.stack([dx + ref_u, dy + ref_v], axis=-1)
    n_ok = cell_ok.reshape(h, w, -1).sum(axis=-1)
    mean_score = np.where(n_ok > 0,
                          np.where(cell_ok, scores, 0.0).reshape(h, w, -1).sum(axis=-1)
                          / np.maximum(n_ok, 1), 0.0)
    sharp = np.where(np.isfinite(c0), c0 - mean_score, 0.0)
    conf = CONF_FLOOR + (CONF_CEIL - CONF_FLOOR) * np.clip(sharp, 0.0, 1.0)
    ok = cell_ok[:, :, s, s] & np.isfinite(c0)
    if valid is not None:
        ok = ok & valid
    flow = np.where(ok[..., None], flow, 0.0)
    return ResidualFlowField(flow, np.repeat(conf[..., None], 2, axis=-1), ok)


def estimate_residual_flow(f_i: FeatureMap, f_j_warped: FeatureMap,
                           estimator: Callable | None = None,
                           valid: np.ndarray | None = None) -> ResidualFlowField:
    """Dense residual flow between aligned feature maps (pluggable)."""
    if estimator is not None:
        return estimator(f_i, f_j_warped, valid)
    return patch_flow(f_i, f_j_warped, valid)


class PatchFlowEstimator:
    """FlowEstimator backed by warping + ZNCC patch matching."""

    def __init__(self, features: Sequence[FeatureMap], k: Intrinsics,
                 patch_radius: int = 2, search_radius: int = 4):
        self.features = list(features)
        self.k = k
        self.patch_radius = patch_radius
        self.search_radius = search_radius

    def __call__(self, i: int, j: int, g_ij: Pose,
                 depth_i: DepthMap) -> ResidualFlowField:
        warped, wvalid = warp_feature_map(self.features[j], self.k, g_ij, depth_i)
        return patch_flow(self.features[i], warped, wvalid,
                          self.patch_radius, self.search_radius)
