"""SE(3) / se(3) operations: exp, log, adjoint, and the point-action Jacobian.

Twists are plain 6-vectors ordered (rho, phi): translational part first,
rotational part (axis-angle, radians) second. Pose increments compose on
the left, ``exp(xi) @ G``, and all Jacobian column layouts follow the same
(rho, phi) ordering.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

# below this angle the closed forms divide by ~0; switch to Taylor series
SMALL_ANGLE = 1e-8


def skew(v: np.ndarray) -> np.ndarray:
    """3x3 cross-product matrix of a 3-vector."""
    x, y, z = v
    return np.array([[0.0, -z, y], [z, 0.0, -x], [-y, x, 0.0]])


@dataclass(frozen=True)
class Pose:
    """Rigid transform: x_out = rotation @ x + translation."""

    rotation: np.ndarray = field(default_factory=lambda: np.eye(3))
    translation: np.ndarray = field(default_factory=lambda: np.zeros(3))

    def __post_init__(self):
        object.__setattr__(self, "rotation", np.asarray(self.rotation, dtype=np.float64))
        object.__setattr__(self, "translation", np.asarray(self.translation, dtype=np.float64))
        self.rotation.setflags(write=False)
        self.translation.setflags(write=False)

    @staticmethod
    def identity() -> "Pose":
        return Pose()

    def matrix(self) -> np.ndarray:
        m = np.eye(4)
        m[:3, :3] = self.rotation
        m[:3, 3] = self.translation
        return m

    def compose(self, other: "Pose") -> "Pose":
        """self applied after other: (self*other)(x) = self(other(x))."""
        return Pose(self.rotation @ other.rotation,
                    self.rotation @ other.translation + self.translation)

    def __matmul__(self, other: "Pose") -> "Pose":
        return self.compose(other)

    def inverse(self) -> "Pose":
        rt = self.rotation.T
        return Pose(rt, -rt @ self.translation)

    def transform(self, pts: np.ndarray) -> np.ndarray:
        """Apply to points of shape (..., 3)."""
        pts = np.asarray(pts, dtype=np.float64)
        return pts @ self.rotation.T + self.translation


def twist(rho, phi) -> np.ndarray:
    """Build a 6-vector twist from translational and rotational parts."""
    out = np.zeros(6)
    out[:3] = rho
    out[3:] = phi
    return out


def _so3_exp_coeffs(theta: float) -> tuple[float, float, float]:
    """Coefficients (A, B, C) with R = I + A*K + B*K^2, V = I + B*K + C*K^2."""
    if theta < SMALL_ANGLE:
        t2 = theta * theta
        a = 1.0 - t2 / 6.0
        b = 0.5 - t2 / 24.0
        c = 1.0 / 6.0 - t2 / 120.0
    else:
        t2 = theta * theta
        a = np.sin(theta) / theta
        b = (1.0 - np.cos(theta)) / t2
        c = (theta - np.sin(theta)) / (t2 * theta)
    return a, b, c


def exp_se3(xi: np.ndarray) -> Pose:
    """Exponential map se(3) -> SE(3) for a (rho, phi)-ordered twist."""
    xi = np.asarray(xi, dtype=np.float64)
    rho, phi = xi[:3], xi[3:]
    theta = float(np.linalg.norm(phi))
    k = skew(phi)
    k2 = k @ k
    a, b, c = _so3_exp_coeffs(theta)
    rot = np.eye(3) + a * k + b * k2
    v = np.eye(3) + b * k + c * k2
    return Pose(rot, v @ rho)


def _so3_log(rot: np.ndarray) -> np.ndarray:
    """Rotation vector of a rotation matrix, magnitude in [0, pi]."""
    trace = np.clip((np.trace(rot) - 1.0) / 2.0, -1.0, 1.0)
    theta = float(np.arccos(trace))
    if theta < SMALL_ANGLE:
        # R - R^T = 2*sin(theta)*K; first-order recovery
        return np.array([rot[2, 1] - rot[1, 2],
                         rot[0, 2] - rot[2, 0],
                         rot[1, 0] - rot[0, 1]]) / 2.0
    if np.pi - theta < 1e-6:
        # near pi the antisymmetric part degenerates; use (R + I)/2 = aa^T + cos-ish
        m = (rot + np.eye(3)) / 2.0
        axis = np.sqrt(np.maximum(np.diagonal(m), 0.0))
        i = int(np.argmax(axis))
        axis = m[i] / max(axis[i], 1e-12)
        axis = axis / np.linalg.norm(axis)
        # canonical sign: first component of largest magnitude positive
        j = int(np.argmax(np.abs(axis)))
        if axis[j] < 0:
            axis = -axis
        return theta * axis
    return theta / (2.0 * np.sin(theta)) * np.array([
        rot[2, 1] - rot[1, 2], rot[0, 2] - rot[2, 0], rot[1, 0] - rot[0, 1]])


def log_se3(g: Pose) -> np.ndarray:
    """Logarithm map SE(3) -> se(3); rotational magnitude in [0, pi]."""
    phi = _so3_log(g.rotation)
    theta = float(np.linalg.norm(phi))
    k = skew(phi)
    k2 = k @ k
    if theta < 1e-2:
        # series for (1 - theta*sin/(2*(1-cos)))/theta^2; the closed form
        # cancels catastrophically below ~1e-2
        t2 = theta * theta
        coef = 1.0 / 12.0 + t2 / 720.0 + t2 * t2 / 30240.0
        vinv = np.eye(3) - 0.5 * k + coef * k2
    else:
        a = np.sin(theta) / theta
        b = (1.0 - np.cos(theta)) / (theta * theta)
        coef = (1.0 - a / (2.0 * b)) / (theta * theta)
        vinv = np.eye(3) - 0.5 * k + coef * k2
    return twist(vinv @ g.translation, phi)


def adjoint(g: Pose) -> np.ndarray:
    """6x6 adjoint: exp(adjoint(g) @ xi) == g * exp(xi) * g^-1."""
    out = np.zeros((6, 6))
    out[:3, :3] = g.rotation
    out[3:, 3:] = g.rotation
    out[:3, 3:] = skew(g.translation) @ g.rotation
    return out


def action_jacobian(x: np.ndarray) -> np.ndarray:
    """d(exp(xi) @ x)/d(xi) at xi = 0, shape (3, 6): [I | -skew(x)]."""
    out = np.zeros((3, 6))
    out[:, :3] = np.eye(3)
    out[:, 3:] = -skew(np.asarray(x, dtype=np.float64))
    return out


def action_jacobian_many(pts: np.ndarray) -> np.ndarray:
    """Vectorized action_jacobian for points of shape (N, 3) -> (N, 3, 6)."""
    pts = np.asarray(pts, dtype=np.float64)
    n = pts.shape[0]
    out = np.zeros((n, 3, 6))
    out[:, 0, 0] = 1.0
    out[:, 1, 1] = 1.0
    out[:, 2, 2] = 1.0
    x, y, z = pts[:, 0], pts[:, 1], pts[:, 2]
    out[:, 0, 4] = z
    out[:, 0, 5] = -y
    out[:, 1, 3] = -z
    out[:, 1, 5] = x
    out[:, 2, 3] = y
    out[:, 2, 4] = -x
    return out
