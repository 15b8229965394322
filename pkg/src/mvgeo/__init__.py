"""Differentiable multi-view geometry toolkit.

Core pieces: SE(3) Lie-group operations (:mod:`mvgeo.lie`), pinhole camera
models (:mod:`mvgeo.camera`), differentiable warping (:mod:`mvgeo.sampler`),
plane-sweep cost volumes (:mod:`mvgeo.costvol`), Gauss-Newton motion
estimation (:mod:`mvgeo.motion`), losses and metrics
(:mod:`mvgeo.loss_metrics`), a synthetic-scene oracle (:mod:`mvgeo.scene`),
the depth/motion alternation pipeline and sliding-window tracker
(:mod:`mvgeo.pipeline`), and file I/O (:mod:`mvgeo.fileio`).

Hot kernels run through numba when available; set ``MVGEO_BACKEND=numpy``
to force the pure-numpy fallback.
"""

from .camera import Intrinsics
from .costvol import CostVolume, DepthHypotheses, depth_hypotheses
from .errors import MvGeoError
from .lie import Pose, adjoint, exp_se3, log_se3, twist
from .maps import DepthMap, FeatureMap
from .motion import ResidualFlowField, update_poses
from .pipeline import FrameSet, PipelineConfig, alternate, track
from .sampler import warp_feature_map
from .scene import SceneParams, generate_scene, render_view

__version__ = "0.1.0"

__all__ = [
    "Intrinsics", "CostVolume", "DepthHypotheses", "depth_hypotheses",
    "MvGeoError", "Pose", "adjoint", "exp_se3", "log_se3", "twist",
    "DepthMap", "FeatureMap", "ResidualFlowField", "update_poses",
    "FrameSet", "PipelineConfig", "alternate", "track",
    "warp_feature_map", "SceneParams", "generate_scene", "render_view",
    "__version__",
]
