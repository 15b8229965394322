import numpy as np
import pytest

from mvgeo.camera import Intrinsics
from mvgeo.errors import DimensionMismatch
from mvgeo.lie import Pose
from mvgeo.maps import DepthMap, FeatureMap
from mvgeo.sampler import (bilinear_sample, is_identity, sample_many,
                           warp_feature_map)


def quad_map():
    return FeatureMap(np.array([[0.0, 1.0], [2.0, 3.0]]))


def test_bilinear_center_hand_value():
    # corners 0,1,2,3 -> center value (0+1+2+3)/4 = 1.5
    r = bilinear_sample(quad_map(), (0.5, 0.5))
    assert r.valid
    assert np.allclose(r.values, [1.5])


def test_bilinear_grid_points_exact():
    f = quad_map()
    for (u, v), want in [((0, 0), 0.0), ((1, 0), 1.0), ((0, 1), 2.0),
                         ((1, 1), 3.0)]:
        r = bilinear_sample(f, (float(u), float(v)))
        assert r.valid
        assert r.values[0] == want


def test_bilinear_out_of_bounds_invalid():
    for uv in [(-1.0, -1.0), (1.5, 0.0), (0.0, 2.0), (-0.001, 0.5)]:
        r = bilinear_sample(quad_map(), uv)
        assert not r.valid
        assert np.array_equal(r.values, [0.0])


def test_bilinear_gradient_hand_value():
    # at (0.5, 0.5): d/du = mean of row diffs = 1, d/dv = mean of col diffs = 2
    r = bilinear_sample(quad_map(), (0.5, 0.5))
    assert np.allclose(r.gradient, [[1.0, 2.0]])


def test_bilinear_gradient_finite_difference(rng):
    f = FeatureMap(rng.normal(size=(8, 8, 3)))
    eps = 1e-6
    for _ in range(30):
        u, v = rng.uniform(0.5, 6.5, 2)
        r = bilinear_sample(f, (u, v))
        du = (bilinear_sample(f, (u + eps, v)).values
              - bilinear_sample(f, (u - eps, v)).values) / (2 * eps)
        dv = (bilinear_sample(f, (u, v + eps)).values
              - bilinear_sample(f, (u, v - eps)).values) / (2 * eps)
        assert np.allclose(r.gradient[:, 0], du, atol=1e-6)
        assert np.allclose(r.gradient[:, 1], dv, atol=1e-6)


def test_sample_many_matches_single(rng):
    f = FeatureMap(rng.normal(size=(8, 8, 2)))
    uv = rng.uniform(-1, 8, (40, 2))
    values, valid, grads = sample_many(f, uv)
    for n in range(40):
        r = bilinear_sample(f, uv[n])
        assert np.array_equal(values[n], r.values)
        assert valid[n] == r.valid
        assert np.array_equal(grads[n], r.gradient)


def test_is_identity():
    assert is_identity(Pose.identity())
    assert not is_identity(Pose(np.eye(3), np.array([1e-300, 0.0, 0.0])))


def test_identity_warp_is_exact(rng):
    k = Intrinsics(57.6, 57.6, 31.5, 31.5, 64, 64)
    f = FeatureMap(rng.normal(size=(64, 64, 3)))
    z = DepthMap(np.full((64, 64), 2.0))
    warped, valid = warp_feature_map(f, k, Pose.identity(), z)
    assert valid.all()
    assert np.array_equal(warped.data, f.data)


def test_warp_shift_matches_roll():
    # integer-pixel shift via geometry: t_x = z/fx samples at u + 1
    k = Intrinsics(57.6, 57.6, 31.5, 31.5, 64, 64)
    rng = np.random.default_rng(3)
    f = FeatureMap(rng.normal(size=(64, 64, 1)))
    z = DepthMap(np.full((64, 64), 2.0))
    g = Pose(np.eye(3), np.array([2.0 / 57.6, 0.0, 0.0]))
    warped, valid = warp_feature_map(f, k, g, z)
    assert valid[:, :-1].all()
    assert not valid[:, -1].any()
    assert np.allclose(warped.data[:, :-1], f.data[:, 1:], atol=1e-9)


def test_warp_invalid_depth_propagates(rng):
    k = Intrinsics(57.6, 57.6, 31.5, 31.5, 64, 64)
    f = FeatureMap(rng.normal(size=(64, 64, 1)))
    values = np.full((64, 64), 2.0)
    mask = np.ones((64, 64), dtype=bool)
    mask[10, 20] = False
    z = DepthMap(values, mask)
    g = Pose(np.eye(3), np.array([-0.01, 0.0, 0.0]))
    warped, valid = warp_feature_map(f, k, g, z)
    assert not valid[10, 20]
    assert np.array_equal(warped.data[10, 20], [0.0])


def test_warp_shape_mismatch_raises(rng):
    k = Intrinsics(57.6, 57.6, 31.5, 31.5, 64, 64)
    f = FeatureMap(rng.normal(size=(32, 32, 1)))
    z = DepthMap(np.full((64, 64), 2.0))
    with pytest.raises(DimensionMismatch):
        warp_feature_map(f, k, Pose.identity(), z)
