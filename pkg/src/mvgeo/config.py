"""Key-value run configuration with schema validation and CLI overrides."""

from __future__ import annotations

from .errors import FormatError
from .fileio import read_keyvalues

# key -> (type, default). Every key is exposed as a --key CLI override.
SCHEMA: dict = {
    "seed": (int, 0),
    "threads": (int, 0),
    "out": (str, ""),
    # scene generation
    "width": (int, 64),
    "height": (int, 64),
    "frames": (int, 4),
    "trajectory": (str, "line"),
    "step": (float, 0.02),
    "arc_deg": (float, 0.5),
    "fps": (float, 10.0),
    "scene_depth_min": (float, 1.5),
    "scene_depth_max": (float, 4.0),
    "primitives": (str, "tilted_plane"),
    "tilt_deg": (float, 8.0),
    "n_waves": (int, 12),
    "min_freq": (float, 0.2),
    "max_freq": (float, 1.5),
    # depth module
    "depth_min": (float, 0.2),
    "depth_max": (float, 10.0),
    "hypotheses": (int, 32),
    "spacing": (str, "inverse"),
    "temperature": (float, 1.0),
    # motion module / pipeline
    "iterations": (int, 8),
    "motion_iterations": (int, 1),
    "track_iterations": (int, 8),
    "mode": (str, "keyframe"),
    "damping": (float, 0.0),
    "estimator": (str, "oracle"),
    "patch_radius": (int, 2),
    "search_radius": (int, 4),
    # pnp harness
    "perturb_rot": (float, 5.0),
    "perturb_trans": (float, 0.1),
    "trials": (int, 1),
    "rot_tol": (float, 0.01),
    "trans_tol": (float, 1e-4),
    # evaluation
    "window": (float, 1.0),
    "depth_scale": (float, 5000.0),
    "smoothness": (float, 0.02),
    "scale_match": (int, 1),
    "families": (str, "all"),
}


def _coerce(key: str, raw):
    typ, _ = SCHEMA[key]
    try:
        return typ(raw)
    except (TypeError, ValueError) as err:
        raise FormatError(f"config key {key!r}: {err}") from err


def load_config(path=None, overrides: dict | None = None) -> dict:
    """Defaults, then config file values, then CLI overrides (which win)."""
    cfg = {key: default for key, (_, default) in SCHEMA.items()}
    if path is not None:
        for key, raw in read_keyvalues(path).items():
            if key not in SCHEMA:
                raise FormatError(f"unknown config key {key!r} in {path}")
            cfg[key] = _coerce(key, raw)
    for key, raw in (overrides or {}).items():
        if raw is None:
            continue
        if key not in SCHEMA:
            raise FormatError(f"unknown config key {key!r}")
        cfg[key] = _coerce(key, raw)
    return cfg
