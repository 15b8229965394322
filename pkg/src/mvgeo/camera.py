"""Pinhole camera model: projection, backprojection, reprojection, Jacobians."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import NonPositiveDepth
from .lie import Pose, action_jacobian_many

# cheirality threshold: points with Z below this are treated as behind the camera
EPS_Z = 1e-6


@dataclass(frozen=True)
class Intrinsics:
    fx: float
    fy: float
    cx: float
    cy: float
    width: int
    height: int

    def __post_init__(self):
        if self.fx <= 0 or self.fy <= 0:
            raise ValueError("focal lengths must be positive")
        if not (0 <= self.cx < self.width and 0 <= self.cy < self.height):
            raise ValueError("principal point outside the image")

    def in_bounds(self, uv: np.ndarray) -> np.ndarray:
        """Elementwise test 0 <= u <= W-1, 0 <= v <= H-1 for (..., 2) coords."""
        uv = np.asarray(uv)
        u, v = uv[..., 0], uv[..., 1]
        return (u >= 0) & (u <= self.width - 1) & (v >= 0) & (v <= self.height - 1)

    def pixel_grid(self) -> np.ndarray:
        """(H, W, 2) array of pixel-center coordinates (u, v)."""
        us, vs = np.meshgrid(np.arange(self.width, dtype=np.float64),
                             np.arange(self.height, dtype=np.float64))
        return np.stack([us, vs], axis=-1)


def _xyz(x: np.ndarray) -> np.ndarray:
    """Accept a 3- or 4-vector (homogeneous) point and return the 3-vector."""
    x = np.asarray(x, dtype=np.float64)
    return x[:3]


def project(k: Intrinsics, x: np.ndarray) -> np.ndarray:
    """Pinhole projection of a 3D point to continuous pixel coordinates."""
    px, py, pz = _xyz(x)
    if pz <= EPS_Z:
        raise NonPositiveDepth(f"Z = {pz} <= {EPS_Z}")
    return np.array([k.fx * px / pz + k.cx, k.fy * py / pz + k.cy])


def backproject(k: Intrinsics, uv: np.ndarray, z: float) -> np.ndarray:
    """Inverse projection: pixel + depth -> homogeneous 3D point (X, Y, Z, 1)."""
    if z <= 0:
        raise NonPositiveDepth(f"depth = {z} <= 0")
    u, v = np.asarray(uv, dtype=np.float64)
    return np.array([z * (u - k.cx) / k.fx, z * (v - k.cy) / k.fy, z, 1.0])


def reproject(k: Intrinsics, g_ij: Pose, uv: np.ndarray, z: float) -> np.ndarray:
    """Pixel in camera i with depth z -> pixel in camera j under g_ij."""
    return project(k, g_ij.transform(backproject(k, uv, z)[:3]))


def projection_jacobian(k: Intrinsics, x: np.ndarray) -> np.ndarray:
    """d(project)/d(point), 2x3."""
    px, py, pz = _xyz(x)
    if pz <= EPS_Z:
        raise NonPositiveDepth(f"Z = {pz} <= {EPS_Z}")
    return np.array([[k.fx / pz, 0.0, -k.fx * px / (pz * pz)],
                     [0.0, k.fy / pz, -k.fy * py / (pz * pz)]])


# ---------------------------------------------------------------------------
# vectorized, non-raising variants used by the dense pipelines


def project_many(k: Intrinsics, pts: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Project (N, 3) points; returns (N, 2) coords and a cheirality mask.

    Failed points get coordinate (0, 0) and valid=False instead of raising.
    """
    pts = np.asarray(pts, dtype=np.float64)
    z = pts[..., 2]
    valid = z > EPS_Z
    zs = np.where(valid, z, 1.0)
    uv = np.stack([k.fx * pts[..., 0] / zs + k.cx,
                   k.fy * pts[..., 1] / zs + k.cy], axis=-1)
    uv[~valid] = 0.0
    return uv, valid


def backproject_many(k: Intrinsics, uv: np.ndarray, z: np.ndarray) -> np.ndarray:
    """Backproject (..., 2) pixels with matching depths to (..., 3) points."""
    uv = np.asarray(uv, dtype=np.float64)
    z = np.asarray(z, dtype=np.float64)
    return np.stack([z * (uv[..., 0] - k.cx) / k.fx,
                     z * (uv[..., 1] - k.cy) / k.fy, z], axis=-1)


def reproject_many(k: Intrinsics, g_ij: Pose, uv: np.ndarray,
                   z: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Vectorized reproject; returns coords and cheirality mask."""
    pts = g_ij.transform(backproject_many(k, uv, z))
    return project_many(k, pts)


def projection_jacobian_many(k: Intrinsics, pts: np.ndarray) -> np.ndarray:
    """Vectorized projection_jacobian for (N, 3) points -> (N, 2, 3).

    Caller is responsible for masking out points failing cheirality.
    """
    pts = np.asarray(pts, dtype=np.float64)
    z = np.where(pts[:, 2] > EPS_Z, pts[:, 2], 1.0)
    n = pts.shape[0]
    out = np.zeros((n, 2, 3))
    out[:, 0, 0] = k.fx / z
    out[:, 0, 2] = -k.fx * pts[:, 0] / (z * z)
    out[:, 1, 1] = k.fy / z
    out[:, 1, 2] = -k.fy * pts[:, 1] / (z * z)
    return out


def reprojection_twist_jacobian(k: Intrinsics, g_ij: Pose, uv: np.ndarray,
                                z: float) -> np.ndarray:
    """d(pi(exp(xi) g_ij pi^-1(uv, z)))/d(xi) at xi = 0, shape (2, 6)."""
    y = g_ij.transform(backproject(k, uv, z)[:3])
    return projection_jacobian(k, y) @ action_jacobian_many(y[None])[0]
