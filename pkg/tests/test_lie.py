import numpy as np
import pytest

from mvgeo.lie import (Pose, action_jacobian, action_jacobian_many, adjoint,
                       exp_se3, log_se3, skew, twist)

from conftest import random_pose


def test_skew_cross_product(rng):
    a = rng.normal(size=3)
    b = rng.normal(size=3)
    assert np.allclose(skew(a) @ b, np.cross(a, b))
    assert np.allclose(skew(a).T, -skew(a))


def test_twist_layout():
    xi = twist([1, 2, 3], [4, 5, 6])
    assert np.array_equal(xi, [1, 2, 3, 4, 5, 6])


def test_exp_zero_is_identity():
    g = exp_se3(np.zeros(6))
    assert np.array_equal(g.rotation, np.eye(3))
    assert np.array_equal(g.translation, np.zeros(3))


def test_exp_pure_rotation_hand_value():
    # 90 degrees about z maps x-axis to y-axis
    g = exp_se3(twist(np.zeros(3), [0, 0, np.pi / 2]))
    assert np.allclose(g.transform([1.0, 0.0, 0.0]), [0.0, 1.0, 0.0],
                       atol=1e-15)


def test_exp_pure_translation():
    g = exp_se3(twist([1, 2, 3], np.zeros(3)))
    assert np.allclose(g.translation, [1, 2, 3])
    assert np.array_equal(g.rotation, np.eye(3))


def test_exp_log_roundtrip(rng):
    for _ in range(100):
        xi = rng.uniform(-1.5, 1.5, 6)
        assert np.allclose(log_se3(exp_se3(xi)), xi, atol=1e-10)


def test_log_exp_roundtrip_small_angle(rng):
    for scale in (1e-3, 1e-6, 1e-9):
        xi = rng.uniform(-1, 1, 6) * scale
        assert np.allclose(log_se3(exp_se3(xi)), xi, rtol=1e-8, atol=1e-15)


def test_compose_inverse(rng):
    g = random_pose(rng)
    gi = g.compose(g.inverse())
    assert np.allclose(gi.rotation, np.eye(3), atol=1e-14)
    assert np.allclose(gi.translation, 0.0, atol=1e-14)


def test_matmul_matches_matrix_product(rng):
    a, b = random_pose(rng), random_pose(rng)
    assert np.allclose((a @ b).matrix(), a.matrix() @ b.matrix())


def test_adjoint_transport(rng):
    # exp(Adj(g) xi) = g exp(xi) g^-1
    for _ in range(20):
        g = random_pose(rng)
        xi = rng.uniform(-0.5, 0.5, 6)
        lhs = exp_se3(adjoint(g) @ xi).matrix()
        rhs = (g @ exp_se3(xi) @ g.inverse()).matrix()
        assert np.allclose(lhs, rhs, atol=1e-12)


def test_action_jacobian_finite_difference(rng):
    x = rng.uniform(-2, 2, 3)
    jac = action_jacobian(x)
    eps = 1e-7
    num = np.zeros((3, 6))
    for i in range(6):
        xi = np.zeros(6)
        xi[i] = eps
        num[:, i] = (exp_se3(xi).transform(x) - exp_se3(-xi).transform(x)) / (2 * eps)
    assert np.allclose(jac, num, atol=1e-7)


def test_action_jacobian_structure(rng):
    x = rng.uniform(-2, 2, 3)
    jac = action_jacobian(x)
    assert np.array_equal(jac[:, :3], np.eye(3))
    assert np.allclose(jac[:, 3:], -skew(x))


def test_action_jacobian_many_matches_single(rng):
    pts = rng.uniform(-2, 2, (10, 3))
    many = action_jacobian_many(pts)
    for n in range(10):
        assert np.array_equal(many[n], action_jacobian(pts[n]))


def test_pose_is_immutable():
    g = Pose.identity()
    with pytest.raises(ValueError):
        g.rotation[0, 0] = 2.0
