"""Dense per-pixel value containers: feature maps and depth maps."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import DimensionMismatch


@dataclass
class FeatureMap:
    """H x W x C real-valued dense feature image."""

    data: np.ndarray

    def __post_init__(self):
        self.data = np.asarray(self.data, dtype=np.float64)
        if self.data.ndim == 2:
            self.data = self.data[..., None]
        if self.data.ndim != 3 or self.data.shape[2] < 1:
            raise DimensionMismatch(f"feature map shape {self.data.shape}")

    @property
    def height(self) -> int:
        return self.data.shape[0]

    @property
    def width(self) -> int:
        return self.data.shape[1]

    @property
    def channels(self) -> int:
        return self.data.shape[2]


@dataclass
class DepthMap:
    """H x W metric depth with a validity mask."""

    values: np.ndarray
    valid: np.ndarray = field(default=None)  # type: ignore[assignment]

    def __post_init__(self):
        self.values = np.asarray(self.values, dtype=np.float64)
        if self.values.ndim != 2:
            raise DimensionMismatch(f"depth map shape {self.values.shape}")
        if self.valid is None:
            self.valid = np.isfinite(self.values) & (self.values > 0)
        else:
            self.valid = np.asarray(self.valid, dtype=bool)
        if self.valid.shape != self.values.shape:
            raise DimensionMismatch("depth/validity shape mismatch")

    @property
    def height(self) -> int:
        return self.values.shape[0]

    @property
    def width(self) -> int:
        return self.values.shape[1]

    @staticmethod
    def constant(height: int, width: int, value: float) -> "DepthMap":
        return DepthMap(np.full((height, width), float(value)))


def joint_valid(a: DepthMap, b: DepthMap) -> np.ndarray:
    if a.values.shape != b.values.shape:
        raise DimensionMismatch("depth maps differ in shape")
    return a.valid & b.valid
