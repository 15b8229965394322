"""Analytic-vs-finite-difference checks for every Jacobian family."""

from __future__ import annotations

from typing import Callable

import numpy as np

from .camera import Intrinsics, project, projection_jacobian
from .costvol import (MatchVolume, depth_hypotheses, soft_argmax_depth,
                      soft_argmax_score_gradient)
from .lie import Pose, action_jacobian, adjoint, exp_se3
from .maps import DepthMap, FeatureMap
from .motion import (FramePairResiduals, backward_solve, linearize,
                     pair_from_flow, residual_at)
from .sampler import sample_many

THRESHOLD = 1e-4
FD_STEP = 1e-6


def _rel(analytic: np.ndarray, numeric: np.ndarray) -> float:
    """Max entry error normalized by the Jacobian's magnitude."""
    scale = max(float(np.max(np.abs(numeric))), 1e-6)
    return float(np.max(np.abs(analytic - numeric)) / scale)


def _central(f: Callable[[np.ndarray], np.ndarray], x0: np.ndarray,
             step: float = FD_STEP) -> np.ndarray:
    """Central finite differences of a vector function; columns follow x0."""
    cols = []
    for i in range(x0.size):
        dx = np.zeros_like(x0)
        dx[i] = step
        cols.append((f(x0 + dx) - f(x0 - dx)) / (2.0 * step))
    return np.stack(cols, axis=-1)


def check_action_jacobian(rng: np.random.Generator, trials: int = 50,
                          fault: bool = False) -> float:
    worst = 0.0
    for _ in range(trials):
        x = rng.uniform(-3.0, 3.0, size=3)
        analytic = action_jacobian(x)
        if fault:
            analytic = analytic.copy()
            analytic[:, 3:] = -analytic[:, 3:]
        numeric = _central(lambda xi: exp_se3(xi).transform(x), np.zeros(6))
        worst = max(worst, _rel(analytic, numeric))
    return worst


def check_projection_jacobian(rng: np.random.Generator, trials: int = 50,
                              fault: bool = False) -> float:
    k = Intrinsics(100.0, 90.0, 32.0, 30.0, 64, 64)
    worst = 0.0
    for _ in range(trials):
        x = np.array([rng.uniform(-1, 1), rng.uniform(-1, 1), rng.uniform(0.5, 5.0)])
        analytic = projection_jacobian(k, x)
        if fault:
            analytic = -analytic
        numeric = _central(lambda p: project(k, p), x)
        worst = max(worst, _rel(analytic, numeric))
    return worst


def check_bilinear_gradient(rng: np.random.Generator, trials: int = 50,
                            fault: bool = False) -> float:
    f = FeatureMap(rng.normal(size=(16, 16, 3)))
    worst = 0.0
    n = 0
    while n < trials:
        uv = rng.uniform(1.1, 13.9, size=2)
        # stay off integer grid lines where the interpolant has kinks
        if min(uv[0] % 1.0, 1.0 - uv[0] % 1.0) < 1e-3:
            continue
        if min(uv[1] % 1.0, 1.0 - uv[1] % 1.0) < 1e-3:
            continue
        n += 1
        _, _, grads = sample_many(f, uv[None])
        analytic = grads[0]
        if fault:
            analytic = -analytic
        numeric = _central(
            lambda c: sample_many(f, c[None])[0][0], uv)
        worst = max(worst, _rel(analytic, numeric))
    return worst


def check_soft_argmax_gradient(rng: np.random.Generator, trials: int = 50,
                               fault: bool = False) -> float:
    hyp = depth_hypotheses(1.0, 5.0, 8, "inverse")
    worst = 0.0
    for _ in range(trials):
        scores = rng.normal(size=(1, 1, 8))
        valid = np.ones((1, 1, 8), dtype=bool)
        m = MatchVolume(scores.copy(), valid)
        analytic = soft_argmax_score_gradient(m, hyp)[0, 0]
        if fault:
            analytic = -analytic
        def depth_of(s):
            vol = MatchVolume(s.reshape(1, 1, 8), valid)
            return np.array([soft_argmax_depth(vol, hyp).values[0, 0]])
        numeric = _central(depth_of, scores.reshape(-1))[0]
        worst = max(worst, _rel(analytic, numeric))
    return worst


def check_cost_cell_pose_gradient(rng: np.random.Generator, trials: int = 50,
                                  fault: bool = False) -> float:
    """d(sampled cost cell)/d(left-multiplied pose twist) vs differences."""
    from .camera import reproject_many, reprojection_twist_jacobian
    k = Intrinsics(60.0, 60.0, 15.5, 15.5, 32, 32)
    f = FeatureMap(rng.normal(size=(32, 32, 2)))
    worst = 0.0
    n = 0
    while n < trials:
        g = exp_se3(rng.uniform(-0.05, 0.05, size=6))
        uv = rng.uniform(4.0, 27.0, size=2)
        z = rng.uniform(1.5, 4.0)
        coords, ok = reproject_many(k, g, uv[None], np.array([z]))
        if not ok[0]:
            continue
        frac_u = coords[0, 0] % 1.0
        frac_v = coords[0, 1] % 1.0
        if min(frac_u, 1 - frac_u, frac_v, 1 - frac_v) < 1e-2:
            continue
        vals, valid, grads = sample_many(f, coords)
        if not valid[0]:
            continue
        n += 1
        analytic = grads[0] @ reprojection_twist_jacobian(k, g, uv, z)
        if fault:
            analytic = -analytic
        def cell_of(xi):
            g2 = exp_se3(xi).compose(g)
            c2, _ = reproject_many(k, g2, uv[None], np.array([z]))
            v2, _, _ = sample_many(f, c2)
            return v2[0]
        numeric = _central(cell_of, np.zeros(6))
        worst = max(worst, _rel(analytic, numeric))
    return worst


def _random_pair(rng: np.random.Generator, k: Intrinsics, n_px: int = 6
                 ) -> tuple[FramePairResiduals, list]:
    poses = [exp_se3(rng.uniform(-0.1, 0.1, size=6)) for _ in range(2)]
    h, w = k.height, k.width
    us = rng.uniform(2, w - 3, size=n_px)
    vs = rng.uniform(2, h - 3, size=n_px)
    flow = rng.normal(scale=0.5, size=(h, w, 2))
    conf = rng.uniform(0.3, 0.9, size=(h, w, 2))
    valid = np.zeros((h, w), dtype=bool)
    valid[vs.astype(int), us.astype(int)] = True
    depth = DepthMap(rng.uniform(1.5, 4.0, size=(h, w)))
    from .motion import ResidualFlowField
    field = ResidualFlowField(flow, conf, valid)
    return pair_from_flow(0, 1, field, depth, k), poses


def check_residual_jacobian(rng: np.random.Generator, trials: int = 50,
                            fault: bool = False) -> float:
    k = Intrinsics(80.0, 80.0, 31.5, 31.5, 64, 64)
    worst = 0.0
    for _ in range(trials):
        pair, poses = _random_pair(rng, k)
        lin = linearize(pair, poses, k)
        j_j, j_i = lin.j_j, lin.j_i
        if fault:
            j_j = -j_j
        def e_of_xij(xi):
            e, _ = residual_at(pair, poses, k, np.zeros(6), xi)
            return e.reshape(-1)
        def e_of_xii(xi):
            e, _ = residual_at(pair, poses, k, xi, np.zeros(6))
            return e.reshape(-1)
        num_j = _central(e_of_xij, np.zeros(6)).reshape(j_j.shape)
        num_i = _central(e_of_xii, np.zeros(6)).reshape(j_i.shape)
        worst = max(worst, _rel(j_j, num_j), _rel(j_i, num_i))
    return worst


def check_backward_solve(rng: np.random.Generator, trials: int = 50,
                         fault: bool = False) -> float:
    worst = 0.0
    for _ in range(trials):
        a = rng.normal(size=(6, 6))
        h = a @ a.T + 6.0 * np.eye(6)
        b = rng.normal(size=6)
        g = rng.normal(size=6)
        x = np.linalg.solve(h, b)
        dl_dh, dl_db = backward_solve(h, x, g)
        if fault:
            dl_db = -dl_db

        def loss_of_b(bb):
            return np.array([g @ np.linalg.solve(h, bb)])

        num_db = _central(loss_of_b, b, step=1e-6)[0]

        def loss_of_h(hf):
            return np.array([g @ np.linalg.solve(hf.reshape(6, 6), b)])

        num_dh = _central(loss_of_h, h.reshape(-1), step=1e-6)[0].reshape(6, 6)
        worst = max(worst, _rel(dl_db, num_db), _rel(dl_dh, num_dh))
    return worst


def check_adjoint(rng: np.random.Generator, trials: int = 50,
                  fault: bool = False) -> float:
    """Conjugation identity exp(Adj(g) xi) == g exp(xi) g^-1."""
    worst = 0.0
    for _ in range(trials):
        g = exp_se3(rng.uniform(-0.8, 0.8, size=6))
        adj = adjoint(g)
        if fault:
            adj = -adj
        xi = rng.uniform(-0.3, 0.3, size=6)
        lhs = exp_se3(adj @ xi).matrix()
        rhs = (g.compose(exp_se3(xi)).compose(g.inverse())).matrix()
        worst = max(worst, float(np.max(np.abs(lhs - rhs))))
    return worst


FAMILIES: dict[str, Callable] = {
    "lie.action_jacobian": check_action_jacobian,
    "lie.adjoint": check_adjoint,
    "camera.projection_jacobian": check_projection_jacobian,
    "sampler.bilinear_gradient": check_bilinear_gradient,
    "costvol.soft_argmax": check_soft_argmax_gradient,
    "costvol.cost_cell_pose": check_cost_cell_pose_gradient,
    "motion.residual_jacobian": check_residual_jacobian,
    "motion.backward_solve": check_backward_solve,
}


def run_checks(families=None, seed: int = 0, trials: int = 50,
               fault: str | None = None) -> list[tuple[str, float, bool]]:
    """Run the requested families; returns (name, max_rel_err, passed) rows."""
    names = list(FAMILIES) if not families else [
        n for n in FAMILIES if any(n.startswith(f) for f in families)]
    rows = []
    for name in names:
        rng = np.random.default_rng(seed)
        err = FAMILIES[name](rng, trials=trials, fault=(fault == name))
        rows.append((name, err, err < THRESHOLD))
    return rows
