"""File formats: TUM trajectories, 16-bit depth images, binary grid dumps."""

from __future__ import annotations

import struct
import warnings
from dataclasses import dataclass
from pathlib import Path
from typing import Sequence

import numpy as np
from PIL import Image

from .errors import FormatError, NonUnitQuaternion
from .lie import Pose
from .maps import DepthMap

GRID_MAGIC = b"V2DG"


# ---------------------------------------------------------------------------
# quaternions (x, y, z, w)


def rotation_to_quaternion(rot: np.ndarray) -> np.ndarray:
    """Rotation matrix -> unit quaternion (qx, qy, qz, qw), qw >= 0."""
    m = rot
    tr = np.trace(m)
    if tr > 0:
        s = np.sqrt(tr + 1.0) * 2.0
        q = np.array([(m[2, 1] - m[1, 2]) / s, (m[0, 2] - m[2, 0]) / s,
                      (m[1, 0] - m[0, 1]) / s, 0.25 * s])
    else:
        i = int(np.argmax(np.diagonal(m)))
        j, k = (i + 1) % 3, (i + 2) % 3
        s = np.sqrt(1.0 + m[i, i] - m[j, j] - m[k, k]) * 2.0
        q = np.zeros(4)
        q[i] = 0.25 * s
        q[j] = (m[j, i] + m[i, j]) / s
        q[k] = (m[k, i] + m[i, k]) / s
        q[3] = (m[k, j] - m[j, k]) / s
    if q[3] < 0:
        q = -q
    return q / np.linalg.norm(q)


def quaternion_to_rotation(q: np.ndarray) -> np.ndarray:
    x, y, z, w = q
    return np.array([
        [1 - 2 * (y * y + z * z), 2 * (x * y - z * w), 2 * (x * z + y * w)],
        [2 * (x * y + z * w), 1 - 2 * (x * x + z * z), 2 * (y * z - x * w)],
        [2 * (x * z - y * w), 2 * (y * z + x * w), 1 - 2 * (x * x + y * y)]])


@dataclass
class TrajectoryRecord:
    timestamp: float
    translation: np.ndarray  # (3,)
    quaternion: np.ndarray   # (qx, qy, qz, qw), unit

    def pose(self) -> Pose:
        return Pose(quaternion_to_rotation(self.quaternion), self.translation)


def pose_to_record(timestamp: float, g: Pose) -> TrajectoryRecord:
    return TrajectoryRecord(timestamp, g.translation.copy(),
                            rotation_to_quaternion(g.rotation))


def write_trajectory(records: Sequence[TrajectoryRecord], path) -> None:
    """TUM text format: `timestamp tx ty tz qx qy qz qw`, one per line."""
    lines = ["# timestamp tx ty tz qx qy qz qw"]
    for r in records:
        fields = [r.timestamp, *r.translation, *r.quaternion]
        lines.append(" ".join(f"{v:.9g}" for v in fields))
    Path(path).write_text("\n".join(lines) + "\n")


def read_trajectory(path) -> list[TrajectoryRecord]:
    records = []
    for lineno, line in enumerate(Path(path).read_text().splitlines(), start=1):
        line = line.strip()
        if not line or line.startswith("#"):
            continue
        fields = line.split()
        if len(fields) != 8:
            raise FormatError(f"{path}:{lineno}: expected 8 fields, got {len(fields)}")
        try:
            vals = [float(f) for f in fields]
        except ValueError as err:
            raise FormatError(f"{path}:{lineno}: {err}") from err
        q = np.array(vals[4:8])
        norm = np.linalg.norm(q)
        if abs(norm - 1.0) > 1e-3:
            raise NonUnitQuaternion(f"{path}:{lineno}: |q| = {norm}")
        if abs(norm - 1.0) > 1e-9:
            warnings.warn(f"{path}:{lineno}: normalizing quaternion (|q| = {norm})")
            q = q / norm
        records.append(TrajectoryRecord(vals[0], np.array(vals[1:4]), q))
    records.sort(key=lambda r: r.timestamp)
    return records


# ---------------------------------------------------------------------------
# 16-bit depth images (stored value = depth * scale; 0 encodes invalid)


def write_depth16(depth: DepthMap, path, scale: float = 5000.0) -> int:
    """Write a depth map as 16-bit grayscale PNG; returns clamp count."""
    if scale <= 0:
        raise ValueError("scale must be positive")
    stored = np.round(depth.values * scale)
    clamped = int(np.sum(depth.valid & (stored > 65535)))
    if clamped:
        warnings.warn(f"{clamped} depth values clamped to 16-bit range")
    stored = np.clip(stored, 0, 65535).astype(np.uint16)
    stored[~depth.valid] = 0
    Image.fromarray(stored).save(str(path))
    return clamped


def read_depth16(path, scale: float = 5000.0) -> DepthMap:
    if scale <= 0:
        raise ValueError("scale must be positive")
    p = Path(path)
    if not p.exists():
        raise FileNotFoundError(str(p))
    try:
        img = Image.open(str(p))
        stored = np.array(img, dtype=np.uint16)
    except Exception as err:
        raise FormatError(f"{path}: {err}") from err
    if stored.ndim != 2:
        raise FormatError(f"{path}: expected single-channel image")
    valid = stored > 0
    return DepthMap(stored.astype(np.float64) / scale, valid)


# ---------------------------------------------------------------------------
# binary grid dump: magic V2DG, u32 dims H W D C (LE), f32 row-major data


def write_grid(array: np.ndarray, path) -> None:
    array = np.asarray(array)
    if array.ndim == 2:
        array = array[:, :, None, None]
    elif array.ndim == 3:
        array = array[:, :, :, None]
    if array.ndim != 4:
        raise FormatError(f"grid must be 2-4 dimensional, got {array.ndim}")
    h, w, d, c = array.shape
    with open(path, "wb") as f:
        f.write(GRID_MAGIC)
        f.write(struct.pack("<4I", h, w, d, c))
        f.write(np.ascontiguousarray(array, dtype="<f4").tobytes())


def read_grid(path) -> np.ndarray:
    p = Path(path)
    if not p.exists():
        raise FileNotFoundError(str(p))
    raw = p.read_bytes()
    if raw[:4] != GRID_MAGIC:
        raise FormatError(f"{path}: bad magic {raw[:4]!r}")
    h, w, d, c = struct.unpack("<4I", raw[4:20])
    data = np.frombuffer(raw[20:], dtype="<f4")
    if data.size != h * w * d * c:
        raise FormatError(f"{path}: size mismatch")
    return data.reshape(h, w, d, c).astype(np.float64)


# ---------------------------------------------------------------------------
# plain-text key-value files (scene descriptions, configs)


def write_keyvalues(pairs: dict, path) -> None:
    lines = [f"{key} = {value}" for key, value in pairs.items()]
    Path(path).write_text("\n".join(lines) + "\n")


def read_keyvalues(path) -> dict:
    p = Path(path)
    if not p.exists():
        raise FileNotFoundError(str(p))
    out = {}
    for lineno, line in enumerate(p.read_text().splitlines(), start=1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise FormatError(f"{path}:{lineno}: expected `key = value`")
        key, value = line.split("=", 1)
        out[key.strip()] = value.strip()
    return out
