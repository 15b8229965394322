import numpy as np
import pytest

from mvgeo.errors import FormatError, NonUnitQuaternion
from mvgeo.fileio import (TrajectoryRecord, pose_to_record,
                          quaternion_to_rotation, read_depth16, read_grid,
                          read_keyvalues, read_trajectory,
                          rotation_to_quaternion, write_depth16, write_grid,
                          write_keyvalues, write_trajectory)
from mvgeo.maps import DepthMap

from conftest import random_pose


def test_quaternion_rotation_roundtrip(rng):
    for _ in range(50):
        rot = random_pose(rng, rot_scale=2.0).rotation
        q = rotation_to_quaternion(rot)
        assert np.isclose(np.linalg.norm(q), 1.0)
        assert np.allclose(quaternion_to_rotation(q), rot, atol=1e-12)


def test_quaternion_identity():
    q = rotation_to_quaternion(np.eye(3))
    assert np.allclose(np.abs(q), [0, 0, 0, 1])


def test_trajectory_roundtrip(tmp_path, rng):
    records = [pose_to_record(0.1 * i, random_pose(rng)) for i in range(5)]
    path = tmp_path / "traj.txt"
    write_trajectory(records, path)
    back = read_trajectory(path)
    assert len(back) == 5
    for a, b in zip(records, back):
        assert b.timestamp == pytest.approx(a.timestamp)
        assert np.allclose(b.pose().matrix(), a.pose().matrix(), atol=1e-7)


def test_trajectory_read_sorts_and_skips_comments(tmp_path):
    path = tmp_path / "traj.txt"
    path.write_text("# header\n"
                    "2.0 0 0 0 0 0 0 1\n"
                    "\n"
                    "1.0 1 2 3 0 0 0 1\n")
    recs = read_trajectory(path)
    assert [r.timestamp for r in recs] == [1.0, 2.0]
    assert np.allclose(recs[0].translation, [1, 2, 3])


def test_trajectory_read_errors(tmp_path):
    bad_fields = tmp_path / "a.txt"
    bad_fields.write_text("1.0 0 0 0 0 0 1\n")
    with pytest.raises(FormatError):
        read_trajectory(bad_fields)
    bad_quat = tmp_path / "b.txt"
    bad_quat.write_text("1.0 0 0 0 0 0 0 2\n")
    with pytest.raises(NonUnitQuaternion):
        read_trajectory(bad_quat)
    almost = tmp_path / "c.txt"
    almost.write_text(f"1.0 0 0 0 0 0 0 {1.0 + 1e-6}\n")
    with pytest.warns(UserWarning):
        recs = read_trajectory(almost)
    assert np.isclose(np.linalg.norm(recs[0].quaternion), 1.0)


def test_depth16_roundtrip(tmp_path, rng):
    values = rng.uniform(0.5, 5.0, (16, 16))
    mask = rng.uniform(size=(16, 16)) > 0.2
    depth = DepthMap(values, mask)
    path = tmp_path / "d.png"
    clamped = write_depth16(depth, path, scale=5000.0)
    assert clamped == 0
    back = read_depth16(path, scale=5000.0)
    assert np.array_equal(back.valid, mask)
    # quantization error bounded by half a step
    assert np.abs(back.values[mask] - values[mask]).max() <= 0.5 / 5000.0 + 1e-12


def test_depth16_clamps_and_warns(tmp_path):
    depth = DepthMap(np.full((4, 4), 100.0))
    path = tmp_path / "d.png"
    with pytest.warns(UserWarning):
        clamped = write_depth16(depth, path, scale=5000.0)
    assert clamped == 16
    back = read_depth16(path)
    assert np.allclose(back.values, 65535 / 5000.0)


def test_depth16_zero_is_invalid(tmp_path):
    depth = DepthMap(np.zeros((4, 4)), np.zeros((4, 4), dtype=bool))
    path = tmp_path / "d.png"
    write_depth16(depth, path)
    back = read_depth16(path)
    assert not back.valid.any()


def test_depth16_missing_file(tmp_path):
    with pytest.raises(FileNotFoundError):
        read_depth16(tmp_path / "nope.png")


def test_grid_roundtrip_all_ranks(tmp_path, rng):
    for shape in [(4, 5), (4, 5, 3), (4, 5, 3, 2)]:
        arr = rng.normal(size=shape).astype(np.float32).astype(np.float64)
        path = tmp_path / "g.v2dg"
        write_grid(arr, path)
        back = read_grid(path)
        assert back.shape[:len(shape)] == shape
        assert np.array_equal(back.reshape(shape), arr)


def test_grid_header_layout(tmp_path):
    path = tmp_path / "g.v2dg"
    write_grid(np.zeros((2, 3, 4, 5)), path)
    raw = path.read_bytes()
    assert raw[:4] == b"V2DG"
    assert len(raw) == 4 + 16 + 2 * 3 * 4 * 5 * 4


def test_grid_errors(tmp_path):
    path = tmp_path / "bad.v2dg"
    path.write_bytes(b"NOPE" + b"\x00" * 20)
    with pytest.raises(FormatError):
        read_grid(path)
    with pytest.raises(FileNotFoundError):
        read_grid(tmp_path / "absent.v2dg")
    with pytest.raises(FormatError):
        write_grid(np.zeros((2, 2, 2, 2, 2)), path)
    truncated = tmp_path / "t.v2dg"
    write_grid(np.zeros((2, 2)), truncated)
    truncated.write_bytes(truncated.read_bytes()[:-4])
    with pytest.raises(FormatError):
        read_grid(truncated)


def test_keyvalues_roundtrip(tmp_path):
    path = tmp_path / "kv.txt"
    write_keyvalues({"width": 64, "name": "scene a"}, path)
    back = read_keyvalues(path)
    assert back == {"width": "64", "name": "scene a"}


def test_keyvalues_comments_and_errors(tmp_path):
    path = tmp_path / "kv.txt"
    path.write_text("# comment\nwidth = 64  # inline\n\nheight=32\n")
    assert read_keyvalues(path) == {"width": "64", "height": "32"}
    bad = tmp_path / "bad.txt"
    bad.write_text("no separator here\n")
    with pytest.raises(FormatError):
        read_keyvalues(bad)
    with pytest.raises(FileNotFoundError):
        read_keyvalues(tmp_path / "absent.txt")
