"""Inference drivers: depth/motion alternation and sliding-window tracking."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .camera import Intrinsics
from .costvol import (build_cost_volume, depth_hypotheses, match_scores,
                      soft_argmax_depth, view_pool)
from .errors import FormatError, InsufficientFrames
from .fileio import read_depth16, read_grid
from .lie import Pose
from .loss_metrics import pose_metrics, sc_inv
from .maps import DepthMap, FeatureMap
from .motion import (FlowEstimator, initialize_poses, relative_pose,
                     update_poses)

WINDOW_SIZE = 8
FIXED_FRAMES = 3


@dataclass
class FrameSet:
    """Input frames: features, strictly increasing timestamps, intrinsics."""

    features: list            # list[FeatureMap]
    timestamps: np.ndarray    # seconds
    intrinsics: Intrinsics
    keyframe: int = 0

    def __post_init__(self):
        self.timestamps = np.asarray(self.timestamps, dtype=np.float64)
        if len(self.features) != self.timestamps.size:
            raise InsufficientFrames("feature/timestamp count mismatch")
        if np.any(np.diff(self.timestamps) <= 0):
            raise FormatError("timestamps must be strictly increasing")

    def __len__(self) -> int:
        return len(self.features)


@dataclass
class PipelineConfig:
    iterations: int = 8
    motion_iterations: int = 1
    depth_min: float = 0.2
    depth_max: float = 10.0
    hypotheses: int = 32
    spacing: str = "inverse"
    temperature: float = 1.0
    mode: str = "keyframe"
    damping: float = 0.0
    track_iterations: int = 8


def init_depth(k: Intrinsics, height: int, width: int, mode: str = "constant",
               depth_min: float = 0.2, depth_max: float = 10.0,
               path=None, scale: float = 5000.0) -> DepthMap:
    """Constant (geometric-mean) or externally loaded initial depth."""
    if mode == "constant":
        return DepthMap.constant(height, width, float(np.sqrt(depth_min * depth_max)))
    if mode == "external":
        if path is None:
            raise FormatError("external init requires a depth file path")
        p = str(path)
        if p.endswith(".v2dg"):
            values = read_grid(p)[:, :, 0, 0]
            return DepthMap(values)
        return read_depth16(p, scale)
    raise FormatError(f"unknown depth init mode {mode!r}")


def _depth_step(fs: FrameSet, poses: Sequence[Pose], keyframe: int, hyp,
                temperature: float) -> DepthMap:
    vols = []
    for j in range(len(fs)):
        if j == keyframe:
            continue
        g = relative_pose(poses, keyframe, j)
        vol = build_cost_volume(fs.features[keyframe], fs.features[j],
                                fs.intrinsics, g, hyp)
        vols.append(match_scores(vol))
    pooled = view_pool(vols)
    return soft_argmax_depth(pooled, hyp, temperature)


def _pose_error(poses: Sequence[Pose], gt_poses: Sequence[Pose],
                keyframe: int) -> tuple[float, float]:
    """Mean relative rotation (deg) and translation (cm) error vs truth."""
    rots, trans = [], []
    for j in range(len(poses)):
        if j == keyframe:
            continue
        est = relative_pose(poses, keyframe, j)
        ref = relative_pose(gt_poses, keyframe, j)
        r, _, t = pose_metrics(est, ref)
        rots.append(r)
        trans.append(t)
    return float(np.mean(rots)), float(np.mean(trans))


@dataclass
class IterationDiagnostics:
    iteration: int
    rot_deg: float = np.nan
    trans_cm: float = np.nan
    sc_inv: float = np.nan

    def row(self) -> str:
        return (f"{self.iteration}\t{self.rot_deg:.9g}\t{self.trans_cm:.9g}"
                f"\t{self.sc_inv:.9g}")


def alternate(fs: FrameSet, config: PipelineConfig, estimator: FlowEstimator,
              gt_poses: Sequence[Pose] | None = None,
              gt_depth: DepthMap | None = None,
              depth0: DepthMap | None = None):
    """Block-coordinate descent: motion update then depth update per iteration.

    Returns (keyframe depth, poses, per-iteration diagnostics). With zero
    iterations the initialization is returned unchanged.
    """
    n = len(fs)
    if n < 2:
        raise InsufficientFrames("alternation needs at least two frames")
    k = fs.intrinsics
    key = fs.keyframe
    h, w = fs.features[key].height, fs.features[key].width
    poses = initialize_poses(n)
    depth = depth0 if depth0 is not None else init_depth(
        k, h, w, "constant", config.depth_min, config.depth_max)
    hyp = depth_hypotheses(config.depth_min, config.depth_max,
                           config.hypotheses, config.spacing)
    diagnostics: list[IterationDiagnostics] = []
    for it in range(config.iterations):
        if config.mode == "keyframe":
            poses = update_poses(poses, {key: depth}, k, estimator,
                                 mode="keyframe", keyframe=key,
                                 iterations=config.motion_iterations,
                                 damping=config.damping)
        else:
            depths = {i: depth if i == key else _depth_step(
                fs, poses, i, hyp, config.temperature) for i in range(n)}
            poses = update_poses(poses, depths, k, estimator, mode="global",
                                 keyframe=key,
                                 iterations=config.motion_iterations,
                                 damping=config.damping)
        depth = _depth_step(fs, poses, key, hyp, config.temperature)
        diag = IterationDiagnostics(it)
        if gt_poses is not None:
            diag.rot_deg, diag.trans_cm = _pose_error(poses, gt_poses, key)
        if gt_depth is not None:
            diag.sc_inv = sc_inv(depth, gt_depth)
        diagnostics.append(diag)
    return depth, poses, diagnostics


def track(fs: FrameSet, depths: Sequence[DepthMap], estimator: FlowEstimator,
          config: PipelineConfig | None = None,
          window_size: int = WINDOW_SIZE,
          fixed_frames: int = FIXED_FRAMES) -> list:
    """Sliding-window tracker; returns a timestamped pose per frame.

    Maintains a window of ``window_size`` frames; each step fixes the first
    ``fixed_frames`` poses and jointly optimizes the rest in global mode.
    New frames enter with the previous frame's pose (constant-position
    model). The first window fixes only frame 0 (bootstrap).
    """
    config = config or PipelineConfig()
    n = len(fs)
    if n < window_size:
        raise InsufficientFrames(f"tracking needs >= {window_size} frames")
    k = fs.intrinsics
    poses = [Pose.identity()] * window_size

    def optimize(start: int, window_poses: list, fixed: list) -> list:
        local_depths = {li: depths[start + li] for li in range(window_size)}

        def est(li, lj, g_ij, depth_i):
            return estimator(start + li, start + lj, g_ij, depth_i)

        return update_poses(window_poses, local_depths, k, est, mode="global",
                            iterations=config.track_iterations, fixed=fixed,
                            damping=config.damping)

    all_poses: list = [None] * n
    poses = optimize(0, poses, [0])
    for li in range(window_size):
        all_poses[li] = poses[li]
    for start in range(1, n - window_size + 1):
        poses = poses[1:] + [poses[-1]]  # new frame: constant-position init
        poses = optimize(start, poses, list(range(fixed_frames)))
        for li in range(window_size):
            all_poses[start + li] = poses[li]
    return [(float(fs.timestamps[i]), all_poses[i]) for i in range(n)]
