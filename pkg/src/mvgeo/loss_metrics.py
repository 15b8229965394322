"""Supervision losses and evaluation metrics (depth, pose, trajectory)."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .camera import Intrinsics, backproject_many, project_many
from .errors import DimensionMismatch, NoAssociations, NoValidPixels
from .lie import Pose, log_se3
from .maps import DepthMap, joint_valid

HUBER_DELTA = 1.0
SMOOTHNESS_WEIGHT = 0.02


@dataclass
class MetricReport:
    abs_rel: float
    sq_rel: float
    rmse: float
    rmse_log: float
    log10: float
    sc_inv: float
    delta1: float
    delta2: float
    delta3: float

    def rows(self) -> list[tuple[str, float]]:
        return [(name, getattr(self, name)) for name in (
            "abs_rel", "sq_rel", "rmse", "rmse_log", "log10", "sc_inv",
            "delta1", "delta2", "delta3")]

    def text(self) -> str:
        return "\n".join(f"{name}\t{value:.12g}" for name, value in self.rows())


def depth_loss(z: DepthMap, z_star: DepthMap,
               w_s: float = SMOOTHNESS_WEIGHT) -> float:
    """L1 depth error plus weighted L1 forward-difference smoothness."""
    mask = joint_valid(z, z_star)
    if not mask.any():
        raise NoValidPixels("no jointly valid pixels")
    data = np.abs(z.values - z_star.values)[mask].sum()
    # forward differences; last column/row excluded, both pixels must be valid
    dx = np.abs(np.diff(z.values, axis=1))
    dx_ok = z.valid[:, :-1] & z.valid[:, 1:]
    dy = np.abs(np.diff(z.values, axis=0))
    dy_ok = z.valid[:-1, :] & z.valid[1:, :]
    smooth = dx[dx_ok].sum() + dy[dy_ok].sum()
    return float(data + w_s * smooth)


def huber(a: np.ndarray, delta: float = HUBER_DELTA) -> np.ndarray:
    """Huber penalty: a^2/2 inside delta, delta*(a - delta/2) outside."""
    a = np.abs(a)
    return np.where(a <= delta, 0.5 * a * a, delta * (a - 0.5 * delta))


def motion_loss(g: Pose, g_star: Pose, z: DepthMap, k: Intrinsics,
                delta: float = HUBER_DELTA) -> float:
    """Huber-robustified reprojection distance between two poses."""
    vs, us = np.nonzero(z.valid)
    if us.size == 0:
        raise NoValidPixels("depth map has no valid pixels")
    pixels = np.stack([us, vs], axis=-1).astype(np.float64)
    pts = backproject_many(k, pixels, z.values[vs, us])
    uv_a, ok_a = project_many(k, g.transform(pts))
    uv_b, ok_b = project_many(k, g_star.transform(pts))
    ok = ok_a & ok_b
    if not ok.any():
        raise NoValidPixels("all pixels fail cheirality")
    dist = np.linalg.norm(uv_a[ok] - uv_b[ok], axis=-1)
    return float(huber(dist, delta).sum())


def total_loss(l_depth: float, l_motion: float, lam: float = 1.0) -> float:
    return float(l_depth + lam * l_motion)


def scale_match(z: DepthMap, z_star: DepthMap) -> tuple[float, DepthMap]:
    """Median-ratio scale alignment of a prediction to the ground truth."""
    mask = joint_valid(z, z_star)
    if not mask.any():
        raise NoValidPixels("no jointly valid pixels")
    s = float(np.median(z_star.values[mask] / z.values[mask]))
    return s, DepthMap(z.values * s, z.valid.copy())


def depth_metrics(z: DepthMap, z_star: DepthMap) -> MetricReport:
    """Standard depth error metrics over the jointly valid pixels."""
    mask = joint_valid(z, z_star)
    if not mask.any():
        raise NoValidPixels("no jointly valid pixels")
    pred = z.values[mask]
    gt = z_star.values[mask]
    diff = pred - gt
    log_diff = np.log(pred) - np.log(gt)
    ratio = np.maximum(pred / gt, gt / pred)
    return MetricReport(
        abs_rel=float(np.mean(np.abs(diff) / gt)),
        sq_rel=float(np.mean(diff ** 2 / gt)),
        rmse=float(np.sqrt(np.mean(diff ** 2))),
        rmse_log=float(np.sqrt(np.mean(log_diff ** 2))),
        log10=float(np.mean(np.abs(np.log10(pred) - np.log10(gt)))),
        sc_inv=float(np.sqrt(np.mean(log_diff ** 2) - np.mean(log_diff) ** 2)),
        delta1=float(np.mean(ratio < 1.25)),
        delta2=float(np.mean(ratio < 1.25 ** 2)),
        delta3=float(np.mean(ratio < 1.25 ** 3)),
    )


def sc_inv(z: DepthMap, z_star: DepthMap) -> float:
    """Scale-invariant log-depth error (standard-deviation form)."""
    mask = joint_valid(z, z_star)
    if not mask.any():
        raise NoValidPixels("no jointly valid pixels")
    d = np.log(z.values[mask]) - np.log(z_star.values[mask])
    return float(np.sqrt(np.mean(d ** 2) - np.mean(d) ** 2))


def pose_metrics(g: Pose, g_star: Pose) -> tuple[float, float, float]:
    """(rotation error deg, translation direction angle deg, |dt| in cm)."""
    err = log_se3(g.compose(g_star.inverse()))
    rot_deg = float(np.degrees(np.linalg.norm(err[3:])))
    t, ts = g.translation, g_star.translation
    nt, nts = np.linalg.norm(t), np.linalg.norm(ts)
    if nt < 1e-9 or nts < 1e-9:
        dir_deg = 0.0
    else:
        cosang = np.clip(np.dot(t, ts) / (nt * nts), -1.0, 1.0)
        dir_deg = float(np.degrees(np.arccos(cosang)))
    trans_cm = float(np.linalg.norm(t - ts) * 100.0)
    return rot_deg, dir_deg, trans_cm


# ---------------------------------------------------------------------------
# trajectory evaluation (relative pose error)


def _associate(t_a: np.ndarray, t_b: np.ndarray, max_dt: float = 0.02):
    """Nearest-neighbor timestamp association within max_dt seconds."""
    pairs = []
    for ia, ta in enumerate(t_a):
        ib = int(np.argmin(np.abs(t_b - ta)))
        if abs(t_b[ib] - ta) <= max_dt:
            pairs.append((ia, ib))
    return pairs


def _rigid_align(src: np.ndarray, dst: np.ndarray) -> Pose:
    """Least-squares rigid transform mapping src points onto dst (Kabsch)."""
    mu_s = src.mean(axis=0)
    mu_d = dst.mean(axis=0)
    cov = (dst - mu_d).T @ (src - mu_s)
    u, _, vt = np.linalg.svd(cov)
    d = np.sign(np.linalg.det(u @ vt))
    rot = u @ np.diag([1.0, 1.0, d]) @ vt
    return Pose(rot, mu_d - rot @ mu_s)


def trajectory_rmse(estimated: Sequence[tuple[float, Pose]],
                    reference: Sequence[tuple[float, Pose]],
                    window: float = 1.0, max_dt: float = 0.02) -> float:
    """Translational relative-pose-error drift in m/s over the given window.

    Poses are camera poses G (world -> camera); trajectories are associated
    by timestamp, rigidly aligned, then drift is measured between all pose
    pairs one window apart.
    """
    t_est = np.array([t for t, _ in estimated])
    t_ref = np.array([t for t, _ in reference])
    pairs = _associate(t_est, t_ref, max_dt)
    if len(pairs) < 2:
        raise NoAssociations("fewer than two matched poses")
    est = [estimated[ia][1] for ia, _ in pairs]
    ref = [reference[ib][1] for _, ib in pairs]
    times = np.array([t_est[ia] for ia, _ in pairs])

    # align estimated camera centers onto the reference (RPE is invariant,
    # alignment kept for protocol fidelity)
    centers_e = np.array([(-p.rotation.T @ p.translation) for p in est])
    centers_r = np.array([(-p.rotation.T @ p.translation) for p in ref])
    align = _rigid_align(centers_e, centers_r)
    est = [p.compose(align.inverse()) for p in est]

    drifts = []
    for a in range(len(times)):
        target = times[a] + window
        b = int(np.argmin(np.abs(times - target)))
        if b <= a or abs(times[b] - target) > max_dt:
            continue
        dt = times[b] - times[a]
        rel_e = est[b].compose(est[a].inverse())
        rel_r = ref[b].compose(ref[a].inverse())
        err = rel_r.inverse().compose(rel_e)
        drifts.append(np.linalg.norm(err.translation) / dt)
    if len(drifts) == 0:
        raise NoAssociations("no pose pairs one window apart")
    return float(np.sqrt(np.mean(np.square(drifts))))
