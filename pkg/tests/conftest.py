"""Shared fixtures for the test suite."""

import numpy as np
import pytest

from mvgeo.camera import Intrinsics
from mvgeo.scene import SceneParams, generate_scene


@pytest.fixture
def rng():
    return np.random.default_rng(0)


@pytest.fixture
def intrinsics():
    return Intrinsics(57.6, 57.6, 31.5, 31.5, 64, 64)


@pytest.fixture
def small_scene():
    """Default 4-frame textured scene used by several integration tests."""
    return generate_scene(7, SceneParams())


def random_pose(rng, rot_scale=0.3, trans_scale=0.5):
    from mvgeo.lie import exp_se3, twist
    phi = rng.uniform(-rot_scale, rot_scale, 3)
    rho = rng.uniform(-trans_scale, trans_scale, 3)
    return exp_se3(twist(rho, phi))
