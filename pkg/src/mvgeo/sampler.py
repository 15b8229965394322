"""Differentiable bilinear sampling and dense cross-camera warping."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import kernels
from .camera import Intrinsics, reproject_many
from .errors import DimensionMismatch
from .lie import Pose
from .maps import DepthMap, FeatureMap


def is_identity(g: Pose) -> bool:
    """Exact (bitwise) identity test for a pose."""
    return bool(np.all(g.rotation == np.eye(3)) and np.all(g.translation == 0.0))


@dataclass
class SampleResult:
    values: np.ndarray   # (C,)
    valid: bool
    gradient: np.ndarray  # (C, 2): d(value)/d(u, v)


def bilinear_sample(f: FeatureMap, uv: np.ndarray) -> SampleResult:
    """Sample a feature map at one continuous coordinate.

    Interpolates against implicit zeros outside the grid; coordinates
    outside [0, W-1] x [0, H-1] are invalid and return zeros. At integer
    grid lines the gradient uses the right-sided sub-cell.
    """
    u, v = np.asarray(uv, dtype=np.float64)
    values, valid, grads = kernels.bilinear_many(
        f.data, np.array([u]), np.array([v]))
    return SampleResult(values[0], bool(valid[0]), grads[0])


def sample_many(f: FeatureMap, uv: np.ndarray):
    """Vectorized sampling at (N, 2) coordinates -> (values, valid, grads)."""
    uv = np.asarray(uv, dtype=np.float64)
    return kernels.bilinear_many(f.data, uv[:, 0].copy(), uv[:, 1].copy())


def warp_feature_map(f_j: FeatureMap, k: Intrinsics, g_ij: Pose,
                     z_i: DepthMap) -> tuple[FeatureMap, np.ndarray]:
    """Warp frame j's features into camera i given frame i's depth.

    Returns the warped map and a validity mask; pixels with invalid depth,
    failed cheirality, or out-of-bounds samples are invalid (zeros).
    """
    if (z_i.height, z_i.width) != (f_j.height, f_j.width):
        raise DimensionMismatch("depth map does not match feature map")
    h, w = z_i.height, z_i.width
    grid = np.stack(np.meshgrid(np.arange(w, dtype=np.float64),
                                np.arange(h, dtype=np.float64)), axis=-1)
    uv = grid.reshape(-1, 2)
    z = np.where(z_i.valid, z_i.values, 1.0).reshape(-1)
    if is_identity(g_ij):
        # identity warp must be exact; skip the project/backproject round trip
        coords, cheir = uv, np.ones(uv.shape[0], dtype=bool)
    else:
        coords, cheir = reproject_many(k, g_ij, uv, z)
    values, in_bounds, _ = kernels.bilinear_many(
        f_j.data, coords[:, 0].copy(), coords[:, 1].copy())
    valid = z_i.valid.reshape(-1) & cheir & in_bounds
    values[~valid] = 0.0
    warped = FeatureMap(values.reshape(h, w, f_j.channels))
    return warped, valid.reshape(h, w)
