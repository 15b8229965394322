"""Synthetic scenes with exact geometric ground truth.

Surfaces are analytic primitives (planes, spheres) textured by band-limited
sums of 3D sinusoids, so every rendered pixel has a closed-form depth and a
closed-form correspondence in every other view. These scenes are the
verification oracle for the geometry pipeline.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace

import numpy as np

from .camera import Intrinsics, reproject_many
from .errors import InvalidParams
from .lie import Pose, exp_se3, twist
from .maps import DepthMap, FeatureMap
from .motion import ResidualFlowField

ORACLE_CONFIDENCE = 0.99
# relative tolerance for the analytic visibility (occlusion) test
VISIBILITY_RTOL = 1e-9


@dataclass(frozen=True)
class SceneParams:
    width: int = 64
    height: int = 64
    focal: float = 0.0            # 0 -> 0.9 * width
    frames: int = 4
    trajectory: str = "line"      # static | line | diagonal | arc
    step: float = 0.02            # meters per frame (line/arc)
    arc_deg: float = 0.5          # yaw per frame for arc trajectories
    fps: float = 10.0
    depth_min: float = 1.5
    depth_max: float = 4.0
    primitives: tuple = ("tilted_plane",)
    tilt_deg: float = 8.0
    n_waves: int = 12
    min_freq: float = 0.2         # cycles per meter
    max_freq: float = 1.5
    channels: int = 3             # texture channels (independent wave groups)

    def intrinsics(self) -> Intrinsics:
        f = self.focal if self.focal > 0 else 0.9 * self.width
        return Intrinsics(f, f, (self.width - 1) / 2.0, (self.height - 1) / 2.0,
                          self.width, self.height)


@dataclass
class Plane:
    normal: np.ndarray  # unit
    offset: float       # normal . p = offset


@dataclass
class Sphere:
    center: np.ndarray
    radius: float


@dataclass
class SyntheticScene:
    params: SceneParams
    intrinsics: Intrinsics
    poses: list          # true poses, world -> camera
    timestamps: np.ndarray
    surfaces: list
    wave_dirs: np.ndarray    # (M, 3), includes frequency magnitude (rad/m)
    wave_phases: np.ndarray  # (M,)
    wave_amps: np.ndarray    # (M,)
    seed: int
    _cache: dict = field(default_factory=dict)

    def texture(self, pts: np.ndarray) -> np.ndarray:
        """Per-channel intensity at world points; output shape (..., C).

        Each channel sums an independent group of waves, so features are a
        function of the world point alone and agree exactly across views.
        """
        phase = pts @ self.wave_dirs.T + self.wave_phases
        c = self.params.channels
        waves = np.sin(phase) * self.wave_amps
        groups = np.array_split(np.arange(waves.shape[-1]), c)
        return np.stack([waves[..., g].sum(axis=-1) for g in groups], axis=-1)

    def camera_center(self, idx: int) -> np.ndarray:
        g = self.poses[idx]
        return -g.rotation.T @ g.translation

    def first_hit(self, origin: np.ndarray, dirs: np.ndarray) -> np.ndarray:
        """Smallest positive ray parameter per direction; inf where no hit.

        dirs is (..., 3); the parameter equals camera depth when dirs are
        camera rays with unit z expressed in world coordinates.
        """
        best = np.full(dirs.shape[:-1], np.inf)
        for surf in self.surfaces:
            if isinstance(surf, Plane):
                denom = dirs @ surf.normal
                num = surf.offset - origin @ surf.normal
                z = np.where(np.abs(denom) > 1e-12, num / np.where(
                    np.abs(denom) > 1e-12, denom, 1.0), np.inf)
                z = np.where(z > 1e-9, z, np.inf)
            else:
                oc = origin - surf.center
                a = np.sum(dirs * dirs, axis=-1)
                b = 2.0 * dirs @ oc
                c = oc @ oc - surf.radius ** 2
                disc = b * b - 4.0 * a * c
                sq = np.sqrt(np.maximum(disc, 0.0))
                z1 = (-b - sq) / (2.0 * a)
                z2 = (-b + sq) / (2.0 * a)
                z = np.where(z1 > 1e-9, z1, np.where(z2 > 1e-9, z2, np.inf))
                z = np.where(disc >= 0.0, z, np.inf)
            best = np.minimum(best, z)
        return best


def _make_trajectory(params: SceneParams) -> list[Pose]:
    poses = []
    for i in range(params.frames):
        if params.trajectory == "static":
            poses.append(Pose.identity())
        elif params.trajectory == "line":
            center = np.array([params.step * i, 0.0, 0.0])
            poses.append(Pose(np.eye(3), -center))
        elif params.trajectory == "diagonal":
            center = np.array([params.step * i, params.step * i, 0.0])
            poses.append(Pose(np.eye(3), -center))
        elif params.trajectory == "arc":
            yaw = np.radians(params.arc_deg) * i
            rot = exp_se3(twist(np.zeros(3), [0.0, yaw, 0.0])).rotation
            center = np.array([params.step * i, 0.0, 0.0])
            poses.append(Pose(rot, -rot @ center))
        else:
            raise InvalidParams(f"unknown trajectory {params.trajectory!r}")
    return poses


def generate_scene(seed: int, params: SceneParams = SceneParams()) -> SyntheticScene:
    """Deterministically build a textured scene and its true trajectory."""
    if params.frames < 1 or params.width < 4 or params.height < 4:
        raise InvalidParams("frames >= 1 and image size >= 4 required")
    if not (0 < params.depth_min < params.depth_max):
        raise InvalidParams("bad depth range")
    rng = np.random.default_rng(seed)
    k = params.intrinsics()

    z_mid = float(np.sqrt(params.depth_min * params.depth_max))
    surfaces: list = []
    for name in params.primitives:
        if name == "fronto_plane":
            surfaces.append(Plane(np.array([0.0, 0.0, 1.0]), z_mid))
        elif name == "tilted_plane":
            tilt = np.radians(params.tilt_deg)
            ang = rng.uniform(0.0, 2.0 * np.pi)
            normal = np.array([np.sin(tilt) * np.cos(ang),
                               np.sin(tilt) * np.sin(ang), np.cos(tilt)])
            surfaces.append(Plane(normal, z_mid * normal[2]))
        elif name == "sphere":
            radius = 0.25 * (params.depth_max - params.depth_min)
            cz = rng.uniform(params.depth_min + radius, z_mid)
            cx = rng.uniform(-0.2, 0.2) * cz
            cy = rng.uniform(-0.2, 0.2) * cz
            surfaces.append(Sphere(np.array([cx, cy, cz]), radius))
        else:
            raise InvalidParams(f"unknown primitive {name!r}")
    if not surfaces:
        raise InvalidParams("at least one primitive required")

    m = params.n_waves
    dirs = rng.normal(size=(m, 3))
    dirs /= np.linalg.norm(dirs, axis=-1, keepdims=True)
    freqs = rng.uniform(params.min_freq, params.max_freq, size=m) * 2.0 * np.pi
    wave_dirs = dirs * freqs[:, None]
    phases = rng.uniform(0.0, 2.0 * np.pi, size=m)
    amps = rng.uniform(0.5, 1.0, size=m) / np.sqrt(max(m // params.channels, 1))

    poses = _make_trajectory(params)
    timestamps = np.arange(params.frames) / params.fps
    return SyntheticScene(params, k, poses, timestamps, surfaces,
                          wave_dirs, phases, amps, seed)


def _camera_rays(k: Intrinsics) -> np.ndarray:
    """(H, W, 3) camera-frame ray directions with unit z."""
    grid = k.pixel_grid()
    return np.stack([(grid[..., 0] - k.cx) / k.fx,
                     (grid[..., 1] - k.cy) / k.fy,
                     np.ones_like(grid[..., 0])], axis=-1)


def render_view(scene: SyntheticScene, idx: int) -> tuple[FeatureMap, DepthMap]:
    """Analytic render: multi-channel surface texture, exact depth."""
    if not (0 <= idx < len(scene.poses)):
        raise IndexError(f"frame {idx} out of range")
    if idx in scene._cache:
        return scene._cache[idx]
    k = scene.intrinsics
    g = scene.poses[idx]
    origin = scene.camera_center(idx)
    dirs = _camera_rays(k) @ g.rotation  # R^T applied to each ray
    z = scene.first_hit(origin, dirs)
    hit = np.isfinite(z)
    zsafe = np.where(hit, z, 1.0)
    pts = origin + zsafe[..., None] * dirs
    features = FeatureMap(scene.texture(pts))
    depth = DepthMap(np.where(hit, zsafe, 0.0), hit)
    scene._cache[idx] = (features, depth)
    return features, depth


def visible_in_frame(scene: SyntheticScene, idx: int,
                     pts_world: np.ndarray) -> np.ndarray:
    """True where world points are the first surface hit from camera idx."""
    origin = scene.camera_center(idx)
    rays = pts_world - origin
    g = scene.poses[idx]
    z_cam = rays @ g.rotation[2]  # camera-frame depth
    ok = z_cam > 1e-9
    dirs = rays / np.where(ok, z_cam, 1.0)[..., None]
    nearest = scene.first_hit(origin, dirs)
    return ok & (nearest >= z_cam * (1.0 - VISIBILITY_RTOL)) & np.isfinite(nearest)


def _oracle_flow_rel(scene: SyntheticScene, i: int, j: int, g_sup: Pose,
                     depth_i: DepthMap | None) -> ResidualFlowField:
    """Exact residual flow given the supplied relative pose and depth."""
    k = scene.intrinsics
    _, depth_true = render_view(scene, i)
    if depth_i is None:
        depth_i = depth_true
    h, w = depth_true.values.shape
    grid = k.pixel_grid().reshape(-1, 2)

    g_true = scene.poses[j].compose(scene.poses[i].inverse())
    z_true = np.where(depth_true.valid, depth_true.values, 1.0).reshape(-1)
    z_sup = np.where(depth_i.valid, depth_i.values, 1.0).reshape(-1)

    uv_true, ok_true = reproject_many(k, g_true, grid, z_true)
    uv_sup, ok_sup = reproject_many(k, g_sup, grid, z_sup)
    flow = (uv_true - uv_sup).reshape(h, w, 2)

    # occlusion: the true world point must be the first hit in frame j
    origin_i = scene.camera_center(i)
    dirs_i = (_camera_rays(k).reshape(-1, 3)) @ scene.poses[i].rotation
    pts_world = origin_i + z_true[:, None] * dirs_i
    vis = visible_in_frame(scene, j, pts_world)

    valid = (depth_true.valid.reshape(-1) & depth_i.valid.reshape(-1)
             & ok_true & ok_sup & vis & k.in_bounds(uv_true)).reshape(h, w)
    flow = np.where(valid[..., None], flow, 0.0)
    conf = np.full((h, w, 2), ORACLE_CONFIDENCE)
    return ResidualFlowField(flow, conf, valid)


def oracle_flow(scene: SyntheticScene, i: int, j: int, poses: list,
                depth_i: DepthMap | None = None) -> ResidualFlowField:
    """Exact residual flow between the true and the supplied geometry.

    flow = pi(G_true_ij pi^-1(x, z_true)) - pi(G_supplied_ij pi^-1(x, z_sup));
    z_sup defaults to the true depth. Pixels whose true correspondence is
    occluded, out of frame, or behind either camera are invalid.
    """
    n = len(scene.poses)
    if not (0 <= i < n and 0 <= j < n):
        raise IndexError("frame index out of range")
    g_sup = poses[j].compose(poses[i].inverse())
    return _oracle_flow_rel(scene, i, j, g_sup, depth_i)


class OracleFlowEstimator:
    """FlowEstimator giving exact flow from scene ground truth."""

    def __init__(self, scene: SyntheticScene):
        self.scene = scene

    def __call__(self, i: int, j: int, g_ij: Pose,
                 depth_i: DepthMap) -> ResidualFlowField:
        return _oracle_flow_rel(self.scene, i, j, g_ij, depth_i)


def perturb_pose(g: Pose, max_rot_deg: float, max_trans_m: float,
                 seed: int) -> Pose:
    """Left-multiply g by exp(xi) with xi uniform in bounded balls."""
    if max_rot_deg < 0 or max_trans_m < 0:
        raise InvalidParams("perturbation bounds must be nonnegative")
    rng = np.random.default_rng(seed)

    def ball(radius):
        if radius == 0:
            return np.zeros(3)
        v = rng.normal(size=3)
        v /= np.linalg.norm(v)
        return v * radius * rng.uniform() ** (1.0 / 3.0)

    rho = ball(max_trans_m)
    phi = ball(np.radians(max_rot_deg))
    return exp_se3(twist(rho, phi)).compose(g)
