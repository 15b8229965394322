"""Command-line interface.

Commands: gen-scene, check-gradients, solve-pnp, run-pipeline, track,
eval-depth, eval-trajectory. Every schema key is available both in the
config file and as a --key override; overrides win. Exit codes: 0 success,
1 threshold/assertion failure, 2 usage or I/O error.
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

import numpy as np

from . import fileio, gradcheck
from .config import SCHEMA, load_config
from .costvol import depth_hypotheses
from .errors import MvGeoError
from .lie import Pose, log_se3
from .loss_metrics import (depth_metrics, pose_metrics, scale_match,
                           trajectory_rmse)
from .maps import DepthMap
from .motion import PatchFlowEstimator, relative_pose, update_poses
from .pipeline import FrameSet, PipelineConfig, alternate, track
from .scene import (OracleFlowEstimator, SceneParams, generate_scene,
                    perturb_pose, render_view)

EXIT_OK = 0
EXIT_THRESHOLD = 1
EXIT_USAGE = 2


def _scene_params(cfg: dict) -> SceneParams:
    return SceneParams(
        width=cfg["width"], height=cfg["height"], frames=cfg["frames"],
        trajectory=cfg["trajectory"], step=cfg["step"], arc_deg=cfg["arc_deg"],
        fps=cfg["fps"], depth_min=cfg["scene_depth_min"],
        depth_max=cfg["scene_depth_max"],
        primitives=tuple(p for p in cfg["primitives"].split(",") if p),
        tilt_deg=cfg["tilt_deg"], n_waves=cfg["n_waves"],
        min_freq=cfg["min_freq"], max_freq=cfg["max_freq"])


def _pipeline_config(cfg: dict) -> PipelineConfig:
    return PipelineConfig(
        iterations=cfg["iterations"], motion_iterations=cfg["motion_iterations"],
        depth_min=cfg["depth_min"], depth_max=cfg["depth_max"],
        hypotheses=cfg["hypotheses"], spacing=cfg["spacing"],
        temperature=cfg["temperature"], mode=cfg["mode"],
        damping=cfg["damping"], track_iterations=cfg["track_iterations"])


def _build_scene(cfg: dict):
    scene = generate_scene(cfg["seed"], _scene_params(cfg))
    views = [render_view(scene, i) for i in range(len(scene.poses))]
    features = [f for f, _ in views]
    depths = [d for _, d in views]
    fs = FrameSet(features, scene.timestamps, scene.intrinsics)
    return scene, fs, depths


def _estimator(cfg: dict, scene, fs: FrameSet):
    if cfg["estimator"] == "oracle":
        return OracleFlowEstimator(scene)
    if cfg["estimator"] == "patch":
        return PatchFlowEstimator(fs.features, fs.intrinsics,
                                  cfg["patch_radius"], cfg["search_radius"])
    raise MvGeoError(f"unknown estimator {cfg['estimator']!r}")


def _require_out(cfg: dict) -> Path:
    if not cfg["out"]:
        raise MvGeoError("--out DIR is required for this command")
    out = Path(cfg["out"])
    out.mkdir(parents=True, exist_ok=True)
    return out


def cmd_gen_scene(cfg: dict) -> int:
    out = _require_out(cfg)
    scene, fs, depths = _build_scene(cfg)
    meta = {k: cfg[k] for k in (
        "seed", "width", "height", "frames", "trajectory", "step", "arc_deg",
        "fps", "scene_depth_min", "scene_depth_max", "primitives", "tilt_deg",
        "n_waves", "min_freq", "max_freq")}
    meta["fx"] = scene.intrinsics.fx
    meta["fy"] = scene.intrinsics.fy
    meta["cx"] = scene.intrinsics.cx
    meta["cy"] = scene.intrinsics.cy
    fileio.write_keyvalues(meta, out / "scene.txt")
    records = [fileio.pose_to_record(float(t), g)
               for t, g in zip(scene.timestamps, scene.poses)]
    fileio.write_trajectory(records, out / "trajectory.txt")
    for i, (feat, depth) in enumerate(zip(fs.features, depths)):
        fileio.write_grid(feat.data, out / f"view_{i:03d}.v2dg")
        fileio.write_depth16(depth, out / f"depth_{i:03d}.png", cfg["depth_scale"])
    print(f"scene written to {out}")
    return EXIT_OK


def cmd_check_gradients(cfg: dict, fault: str | None = None) -> int:
    families = None if cfg["families"] in ("", "all") else cfg["families"].split(",")
    rows = gradcheck.run_checks(families, seed=cfg["seed"], fault=fault)
    ok = True
    for name, err, passed in rows:
        print(f"{name}\t{err:.3e}\t{'pass' if passed else 'FAIL'}")
        ok &= passed
    if not ok:
        failing = ", ".join(n for n, _, p in rows if not p)
        print(f"gradient check failed: {failing}", file=sys.stderr)
        return EXIT_THRESHOLD
    return EXIT_OK


def cmd_solve_pnp(cfg: dict) -> int:
    scene, fs, depths = _build_scene(cfg)
    estimator = _estimator(cfg, scene, fs)
    k = fs.intrinsics
    n = len(fs)
    rng_seeds = [cfg["seed"] * 1000 + t for t in range(cfg["trials"])]
    failures = 0
    for trial, pseed in enumerate(rng_seeds):
        poses = [scene.poses[0]] + [
            perturb_pose(scene.poses[j], cfg["perturb_rot"],
                         cfg["perturb_trans"], pseed + 17 * j)
            for j in range(1, n)]
        depth_map = {i: depths[i] for i in range(n)}
        print(f"trial {trial}")
        print("iter\trot_deg\ttrans_m")
        rot = trans = 0.0
        for it in range(cfg["iterations"]):
            poses = update_poses(poses, depth_map, k, estimator,
                                 mode=cfg["mode"], iterations=1,
                                 damping=cfg["damping"])
            rot, trans = _max_pose_error(poses, scene.poses)
            print(f"{it}\t{rot:.3e}\t{trans:.3e}")
        if cfg["mode"] == "global" and n >= 3:
            print(f"loop_closure\t{_loop_closure(poses):.3e}")
        if rot > cfg["rot_tol"] or trans > cfg["trans_tol"]:
            failures += 1
    if failures:
        print(f"{failures}/{cfg['trials']} trials exceeded tolerances",
              file=sys.stderr)
        return EXIT_THRESHOLD
    return EXIT_OK


def _max_pose_error(poses, gt_poses) -> tuple[float, float]:
    """Max relative rotation (deg) / translation (m) error over frame pairs."""
    rot = trans = 0.0
    for j in range(1, len(poses)):
        est = relative_pose(poses, 0, j)
        ref = relative_pose(gt_poses, 0, j)
        r, _, t_cm = pose_metrics(est, ref)
        rot = max(rot, r)
        trans = max(trans, t_cm / 100.0)
    return rot, trans


def _loop_closure(poses) -> float:
    n = len(poses)
    worst = 0.0
    for i in range(n):
        for j in range(n):
            for l in range(n):
                if len({i, j, l}) < 3:
                    continue
                g = (relative_pose(poses, i, j)
                     .compose(relative_pose(poses, j, l))
                     .compose(relative_pose(poses, i, l).inverse()))
                worst = max(worst, float(np.linalg.norm(log_se3(g))))
    return worst


def cmd_run_pipeline(cfg: dict) -> int:
    out = _require_out(cfg)
    scene, fs, depths = _build_scene(cfg)
    estimator = _estimator(cfg, scene, fs)
    depth, poses, diags = alternate(fs, _pipeline_config(cfg), estimator,
                                    gt_poses=scene.poses, gt_depth=depths[0])
    fileio.write_depth16(depth, out / "depth.png", cfg["depth_scale"])
    records = [fileio.pose_to_record(float(t), g)
               for t, g in zip(fs.timestamps, poses)]
    fileio.write_trajectory(records, out / "trajectory.txt")
    rows = ["iter\trot_deg\ttrans_cm\tsc_inv"] + [d.row() for d in diags]
    (out / "diagnostics.txt").write_text("\n".join(rows) + "\n")
    for row in rows:
        print(row)
    return EXIT_OK


def cmd_track(cfg: dict) -> int:
    out = _require_out(cfg)
    scene, fs, depths = _build_scene(cfg)
    estimator = _estimator(cfg, scene, fs)
    trajectory = track(fs, depths, estimator, _pipeline_config(cfg))
    records = [fileio.pose_to_record(t, g) for t, g in trajectory]
    fileio.write_trajectory(records, out / "trajectory.txt")
    reference = [(float(t), g) for t, g in zip(scene.timestamps, scene.poses)]
    rmse = trajectory_rmse(trajectory, reference, cfg["window"])
    print(f"trajectory_rmse\t{rmse:.9g}")
    return EXIT_OK


def _read_depth_any(path: str, scale: float) -> DepthMap:
    if path.endswith(".v2dg"):
        return DepthMap(fileio.read_grid(path)[:, :, 0, 0])
    return fileio.read_depth16(path, scale)


def cmd_eval_depth(cfg: dict, pred: str, gt: str) -> int:
    z = _read_depth_any(pred, cfg["depth_scale"])
    z_star = _read_depth_any(gt, cfg["depth_scale"])
    if cfg["scale_match"]:
        _, z = scale_match(z, z_star)
    report = depth_metrics(z, z_star)
    print(report.text())
    return EXIT_OK


def cmd_eval_trajectory(cfg: dict, est: str, ref: str) -> int:
    est_records = fileio.read_trajectory(est)
    ref_records = fileio.read_trajectory(ref)
    est_t = [(r.timestamp, r.pose()) for r in est_records]
    ref_t = [(r.timestamp, r.pose()) for r in ref_records]
    rmse = trajectory_rmse(est_t, ref_t, cfg["window"])
    print(f"trajectory_rmse\t{rmse:.9g}")
    return EXIT_OK


def _add_config_args(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--config", default=None, help="key-value config file")
    for key, (typ, _) in SCHEMA.items():
        parser.add_argument(f"--{key.replace('_', '-')}", dest=key,
                            type=str, default=None, metavar=typ.__name__.upper())


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="mvgeo")
    sub = parser.add_subparsers(dest="command", required=True)
    for name in ("gen-scene", "check-gradients", "solve-pnp", "run-pipeline",
                 "track", "eval-depth", "eval-trajectory"):
        p = sub.add_parser(name)
        _add_config_args(p)
        if name == "check-gradients":
            p.add_argument("--inject-fault", default=None, help=argparse.SUPPRESS)
        if name == "eval-depth":
            p.add_argument("--pred", required=True)
            p.add_argument("--gt", required=True)
        if name == "eval-trajectory":
            p.add_argument("--est", required=True)
            p.add_argument("--ref", required=True)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    overrides = {key: getattr(args, key) for key in SCHEMA if hasattr(args, key)}
    try:
        cfg = load_config(args.config, overrides)
    except (MvGeoError, FileNotFoundError) as err:
        print(f"error: {err}", file=sys.stderr)
        return EXIT_USAGE
    if cfg["threads"] > 0:
        try:
            import numba
            numba.set_num_threads(min(cfg["threads"],
                                      numba.config.NUMBA_NUM_THREADS))
        except ImportError:
            pass
    try:
        if args.command == "gen-scene":
            return cmd_gen_scene(cfg)
        if args.command == "check-gradients":
            return cmd_check_gradients(cfg, args.inject_fault)
        if args.command == "solve-pnp":
            return cmd_solve_pnp(cfg)
        if args.command == "run-pipeline":
            return cmd_run_pipeline(cfg)
        if args.command == "track":
            return cmd_track(cfg)
        if args.command == "eval-depth":
            return cmd_eval_depth(cfg, args.pred, args.gt)
        if args.command == "eval-trajectory":
            return cmd_eval_trajectory(cfg, args.est, args.ref)
        raise AssertionError(args.command)
    except (MvGeoError, FileNotFoundError, OSError) as err:
        print(f"error: {err}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
