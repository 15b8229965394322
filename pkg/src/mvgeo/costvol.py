"""Plane-sweep cost volumes, view pooling, matching scores, soft-argmax depth."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

from . import kernels
from .camera import Intrinsics, reproject_many
from .errors import DimensionMismatch, EmptyInput, InvalidRange
from .lie import Pose
from .maps import DepthMap, FeatureMap
from .sampler import is_identity

NEG_INF = -np.inf


@dataclass(frozen=True)
class DepthHypotheses:
    """Strictly increasing depth samples z_1 < ... < z_D."""

    values: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "values", np.asarray(self.values, dtype=np.float64))
        if self.values.ndim != 1 or self.values.size < 2:
            raise InvalidRange("need at least two hypotheses")
        if self.values[0] <= 0 or np.any(np.diff(self.values) <= 0):
            raise InvalidRange("hypotheses must be positive and strictly increasing")

    @property
    def count(self) -> int:
        return self.values.size


def depth_hypotheses(z_min: float, z_max: float, d: int = 32,
                     spacing: str = "inverse") -> DepthHypotheses:
    """Enumerate d depths over [z_min, z_max], linear in z or in 1/z."""
    if not (0 < z_min < z_max):
        raise InvalidRange(f"bad depth range ({z_min}, {z_max})")
    if d < 2:
        raise InvalidRange("need at least two hypotheses")
    if spacing == "linear":
        vals = np.linspace(z_min, z_max, d)
    elif spacing == "inverse":
        vals = 1.0 / np.linspace(1.0 / z_min, 1.0 / z_max, d)
    else:
        raise InvalidRange(f"unknown spacing {spacing!r}")
    return DepthHypotheses(vals)


@dataclass
class CostVolume:
    """H x W x D x 2C match volume; last C channels repeat keyframe features."""

    data: np.ndarray
    valid: np.ndarray  # (H, W, D)

    @property
    def channels(self) -> int:
        return self.data.shape[3] // 2


@dataclass
class MatchVolume:
    scores: np.ndarray  # (H, W, D)
    valid: np.ndarray   # (H, W, D)


def build_cost_volume(f_keyframe: FeatureMap, f_j: FeatureMap, k: Intrinsics,
                      g_1j: Pose, hyp: DepthHypotheses) -> CostVolume:
    """Backproject keyframe pixels at every hypothesis and sample frame j.

    Cell (u, v, d) holds [F_j sampled at the reprojection | F_1(u, v)];
    invalid where cheirality or sampling bounds fail.
    """
    if f_keyframe.data.shape != f_j.data.shape:
        raise DimensionMismatch("feature maps differ in shape")
    h, w, c = f_keyframe.data.shape
    d = hyp.count
    grid = np.stack(np.meshgrid(np.arange(w, dtype=np.float64),
                                np.arange(h, dtype=np.float64)), axis=-1)
    uv = grid.reshape(-1, 2)
    data = np.zeros((h, w, d, 2 * c))
    valid = np.zeros((h, w, d), dtype=bool)
    identity = is_identity(g_1j)
    for di, z in enumerate(hyp.values):
        if identity:
            coords = uv
            cheir = np.ones(uv.shape[0], dtype=bool)
        else:
            coords, cheir = reproject_many(k, g_1j, uv, np.full(uv.shape[0], z))
        vals, in_bounds, _ = kernels.bilinear_many(
            f_j.data, coords[:, 0].copy(), coords[:, 1].copy())
        ok = cheir & in_bounds
        vals[~ok] = 0.0
        data[:, :, di, :c] = vals.reshape(h, w, c)
        valid[:, :, di] = ok.reshape(h, w)
    data[:, :, :, c:] = f_keyframe.data[:, :, None, :]
    data[~valid] = 0.0
    return CostVolume(data, valid)


def view_pool(volumes: Sequence[MatchVolume]) -> MatchVolume:
    """Per-cell mean over the volumes where the cell is valid; union validity.

    Fixed left-to-right accumulation so results are bit-deterministic.
    """
    if len(volumes) == 0:
        raise EmptyInput("no match volumes to pool")
    shape = volumes[0].scores.shape
    total = np.zeros(shape)
    count = np.zeros(shape)
    for vol in volumes:
        if vol.scores.shape != shape:
            raise DimensionMismatch("match volumes differ in shape")
        total = total + np.where(vol.valid, vol.scores, 0.0)
        count = count + vol.valid
    valid = count > 0
    scores = np.where(valid, total / np.maximum(count, 1.0), 0.0)
    return MatchVolume(scores, valid)


def negative_mse_matcher(vol: CostVolume) -> np.ndarray:
    """Default matching score: negated mean squared channel difference."""
    c = vol.channels
    diff = vol.data[..., :c] - vol.data[..., c:]
    return -np.mean(diff * diff, axis=-1)


def match_scores(vol: CostVolume,
                 matcher: Callable[[CostVolume], np.ndarray] = negative_mse_matcher
                 ) -> MatchVolume:
    """Score each cell with the pluggable matcher; invalid cells get -inf."""
    scores = matcher(vol)
    scores = np.where(vol.valid, scores, NEG_INF)
    return MatchVolume(scores, vol.valid.copy())


def soft_argmax_depth(m: MatchVolume, hyp: DepthHypotheses,
                      temperature: float = 1.0) -> DepthMap:
    """Expected depth under the per-pixel softmax over valid hypotheses."""
    if temperature <= 0:
        raise InvalidRange("temperature must be positive")
    scores = np.where(m.valid, m.scores, NEG_INF) / temperature
    any_valid = m.valid.any(axis=-1)
    # stabilized softmax; fully-invalid pixels handled via the mask
    peak = np.max(np.where(any_valid[..., None], scores, 0.0), axis=-1, keepdims=True)
    expo = np.exp(np.where(np.isneginf(scores), -np.inf, scores - peak))
    expo = np.where(m.valid, expo, 0.0)
    norm = expo.sum(axis=-1)
    weights = expo / np.where(any_valid, norm, 1.0)[..., None]
    depth = np.tensordot(weights, hyp.values, axes=([-1], [0]))
    return DepthMap(np.where(any_valid, depth, 0.0), any_valid)


def soft_argmax_weights(m: MatchVolume, temperature: float = 1.0) -> np.ndarray:
    """Softmax weights used by soft_argmax_depth (for gradient checks)."""
    scores = np.where(m.valid, m.scores, NEG_INF) / temperature
    any_valid = m.valid.any(axis=-1)
    peak = np.max(np.where(any_valid[..., None], scores, 0.0), axis=-1, keepdims=True)
    expo = np.exp(np.where(np.isneginf(scores), -np.inf, scores - peak))
    expo = np.where(m.valid, expo, 0.0)
    norm = expo.sum(axis=-1)
    return expo / np.where(any_valid, norm, 1.0)[..., None]


def soft_argmax_score_gradient(m: MatchVolume, hyp: DepthHypotheses,
                               temperature: float = 1.0) -> np.ndarray:
    """Analytic d(depth)/d(scores), shape (H, W, D), zero on invalid cells."""
    w = soft_argmax_weights(m, temperature)
    mean_depth = np.tensordot(w, hyp.values, axes=([-1], [0]))
    grad = w * (hyp.values[None, None, :] - mean_depth[..., None]) / temperature
    return np.where(m.valid, grad, 0.0)
