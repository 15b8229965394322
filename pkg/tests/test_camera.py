import numpy as np
import pytest

from mvgeo.camera import (Intrinsics, backproject, backproject_many, project,
                          project_many, projection_jacobian,
                          projection_jacobian_many, reproject_many)
from mvgeo.errors import MvGeoError
from mvgeo.lie import Pose

from conftest import random_pose


def test_intrinsics_validation():
    with pytest.raises(ValueError):
        Intrinsics(-1.0, 1.0, 0.0, 0.0, 4, 4)
    with pytest.raises(ValueError):
        Intrinsics(1.0, 1.0, 10.0, 0.0, 4, 4)


def test_project_hand_value():
    k = Intrinsics(100.0, 100.0, 32.0, 24.0, 64, 48)
    # X = (0.1, -0.2, 2) -> u = 100*0.05 + 32, v = 100*(-0.1) + 24
    uv = project(k, np.array([0.1, -0.2, 2.0]))
    assert np.allclose(uv, [37.0, 14.0])


def test_project_principal_ray():
    k = Intrinsics(57.6, 57.6, 31.5, 31.5, 64, 64)
    assert np.allclose(project(k, [0.0, 0.0, 3.0]), [31.5, 31.5])


def test_project_homogeneous_point():
    k = Intrinsics(100.0, 100.0, 32.0, 24.0, 64, 48)
    a = project(k, np.array([0.1, -0.2, 2.0]))
    b = project(k, np.array([0.1, -0.2, 2.0, 1.0]))
    assert np.array_equal(a, b)


def test_project_behind_camera_raises():
    k = Intrinsics(100.0, 100.0, 32.0, 24.0, 64, 48)
    with pytest.raises(MvGeoError):
        project(k, np.array([0.0, 0.0, -1.0]))


def test_backproject_project_roundtrip(rng):
    k = Intrinsics(57.6, 57.6, 31.5, 31.5, 64, 64)
    for _ in range(50):
        uv = rng.uniform(0, 63, 2)
        z = rng.uniform(0.5, 10.0)
        x = backproject(k, uv, z)
        assert np.isclose(x[2], z)
        assert np.allclose(project(k, x), uv, atol=1e-12)


def test_project_many_cheirality_mask(rng):
    k = Intrinsics(57.6, 57.6, 31.5, 31.5, 64, 64)
    pts = np.array([[0.0, 0.0, 2.0], [0.0, 0.0, -2.0], [0.1, 0.1, 1.0]])
    uv, ok = project_many(k, pts)
    assert ok.tolist() == [True, False, True]
    assert np.allclose(uv[0], [31.5, 31.5])


def test_backproject_many_matches_single(rng):
    k = Intrinsics(57.6, 57.6, 31.5, 31.5, 64, 64)
    uv = rng.uniform(0, 63, (20, 2))
    z = rng.uniform(0.5, 5.0, 20)
    many = backproject_many(k, uv, z)
    for n in range(20):
        # single-point variant returns the homogeneous 4-vector
        assert np.allclose(many[n], backproject(k, uv[n], z[n])[:3])


def test_projection_jacobian_finite_difference(rng):
    k = Intrinsics(57.6, 57.6, 31.5, 31.5, 64, 64)
    for _ in range(20):
        x = np.array([rng.uniform(-1, 1), rng.uniform(-1, 1),
                      rng.uniform(0.5, 5.0)])
        jac = projection_jacobian(k, x)
        eps = 1e-7
        num = np.zeros((2, 3))
        for i in range(3):
            dx = np.zeros(3)
            dx[i] = eps
            num[:, i] = (project(k, x + dx) - project(k, x - dx)) / (2 * eps)
        assert np.allclose(jac, num, atol=1e-5)


def test_projection_jacobian_many_matches_single(rng):
    k = Intrinsics(57.6, 57.6, 31.5, 31.5, 64, 64)
    pts = np.stack([rng.uniform(-1, 1, 8), rng.uniform(-1, 1, 8),
                    rng.uniform(0.5, 5.0, 8)], axis=-1)
    many = projection_jacobian_many(k, pts)
    for n in range(8):
        assert np.allclose(many[n], projection_jacobian(k, pts[n]))


def test_reproject_identity_is_identity(rng):
    k = Intrinsics(57.6, 57.6, 31.5, 31.5, 64, 64)
    uv = rng.uniform(0, 63, (30, 2))
    z = rng.uniform(0.5, 5.0, 30)
    out, ok = reproject_many(k, Pose.identity(), uv, z)
    assert ok.all()
    assert np.allclose(out, uv, atol=1e-12)


def test_reproject_epipolar_shift():
    # pure x-translation of the camera shifts projections by -fx*t/z
    k = Intrinsics(57.6, 57.6, 31.5, 31.5, 64, 64)
    g = Pose(np.eye(3), np.array([-0.1, 0.0, 0.0]))
    uv = np.array([[31.5, 31.5]])
    z = np.array([2.0])
    out, ok = reproject_many(k, g, uv, z)
    assert ok.all()
    assert np.allclose(out[0], [31.5 - 57.6 * 0.1 / 2.0, 31.5])


def test_reproject_roundtrip_inverse(rng):
    k = Intrinsics(57.6, 57.6, 31.5, 31.5, 64, 64)
    g = random_pose(rng, rot_scale=0.05, trans_scale=0.05)
    uv = rng.uniform(10, 50, (20, 2))
    z = rng.uniform(1.0, 5.0, 20)
    fwd, ok1 = reproject_many(k, g, uv, z)
    pts = g.transform(backproject_many(k, uv, z))
    back, ok2 = reproject_many(k, g.inverse(), fwd, pts[:, 2])
    assert (ok1 & ok2).all()
    assert np.allclose(back, uv, atol=1e-9)
