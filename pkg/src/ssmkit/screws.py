"""
Minimal rigid-body and screw algebra: rotation matrices, zero-pitch twists,
their exponentials, and pose composition.

Conventions used throughout the package:
- rotations are explicit 3x3 numpy arrays, positions are numpy 3-vectors
  (meters),
- every revolute axis passes through the origin (the remote center of
  motion), so revolute twists carry a zero linear part,
- joint angles returned by any solver live in (-pi, pi],
- unit-norm and orthonormality are accepted within 1e-9 on input and
  guaranteed within 1e-12 on constructor output.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum

import numpy as np

from .errors import DomainError

UNIT_TOL = 1e-9

_TWO_PI = 2.0 * math.pi


def normalize_angle(theta: float) -> float:
    """Map an angle to its representative in (-pi, pi]."""
    r = theta % _TWO_PI
    if r > math.pi:
        r -= _TWO_PI
    return r


def unit(v) -> np.ndarray:
    """Rescale a 3-vector to unit norm, rejecting inputs far from unit."""
    v = np.asarray(v, dtype=float)
    n = math.sqrt(float(v @ v))
    if abs(n - 1.0) > UNIT_TOL:
        raise DomainError(f"expected a unit vector, got norm {n:.3e}")
    return v / n


def hat(w) -> np.ndarray:
    """Skew-symmetric cross-product matrix of a 3-vector."""
    x, y, z = w
    return np.array([[0.0, -z, y], [z, 0.0, -x], [-y, x, 0.0]])


def rodrigues(axis, angle: float) -> np.ndarray:
    """Rotation matrix for a rotation by `angle` about a unit `axis`."""
    x, y, z = axis
    n = math.sqrt(x * x + y * y + z * z)
    if abs(n - 1.0) > UNIT_TOL:
        raise DomainError(f"rotation axis must be unit, got norm {n:.3e}")
    x /= n
    y /= n
    z /= n
    c = math.cos(angle)
    s = math.sin(angle)
    k = 1.0 - c
    return np.array(
        [
            [c + k * x * x, k * x * y - s * z, k * x * z + s * y],
            [k * x * y + s * z, c + k * y * y, k * y * z - s * x],
            [k * x * z - s * y, k * y * z + s * x, c + k * z * z],
        ]
    )


def ensure_rotation(r, tol: float = UNIT_TOL) -> np.ndarray:
    """
    Validate a 3x3 rotation matrix and return its nearest orthonormal
    representative (so downstream code sees orthonormality at 1e-12).
    """
    r = np.asarray(r, dtype=float)
    if r.shape != (3, 3):
        raise DomainError(f"rotation must be 3x3, got shape {r.shape}")
    defect = np.abs(r.T @ r - np.eye(3)).max()
    if defect > tol:
        raise DomainError(f"matrix is not orthonormal (defect {defect:.3e})")
    u, _, vt = np.linalg.svd(r)
    out = u @ vt
    if np.linalg.det(out) < 0.0:
        raise DomainError("matrix is a reflection, not a rotation")
    return out


class JointKind(Enum):
    REVOLUTE = "revolute"
    PRISMATIC = "prismatic"


@dataclass(frozen=True, eq=False)
class Twist:
    """Unit zero-pitch screw coordinates (linear, angular) of a joint."""

    linear: np.ndarray
    angular: np.ndarray
    kind: JointKind


def revolute_twist(omega) -> Twist:
    """Twist of a revolute joint whose axis passes through the origin."""
    return Twist(np.zeros(3), unit(omega), JointKind.REVOLUTE)


def prismatic_twist(v) -> Twist:
    """Twist of a prismatic joint translating along the unit direction v."""
    return Twist(unit(v), np.zeros(3), JointKind.PRISMATIC)


@dataclass(frozen=True, eq=False)
class Pose:
    """Rigid-body transform: rotation matrix plus position vector."""

    rotation: np.ndarray
    position: np.ndarray


def identity_pose() -> Pose:
    return Pose(np.eye(3), np.zeros(3))


def twist_exp(xi: Twist, theta: float) -> Pose:
    """
    Exponential of a unit twist scaled by theta (radians for revolute
    joints, meters for prismatic ones).
    """
    if xi.kind is JointKind.REVOLUTE:
        return Pose(rodrigues(xi.angular, theta), np.zeros(3))
    return Pose(np.eye(3), xi.linear * theta)


def pose_apply(g: Pose, p) -> np.ndarray:
    """Apply a rigid transform to a point: R p + t."""
    return g.rotation @ np.asarray(p, dtype=float) + g.position


def pose_compose(a: Pose, b: Pose) -> Pose:
    """Composition a * b (apply b first, then a)."""
    return Pose(a.rotation @ b.rotation, a.rotation @ b.position + a.position)


def pose_inverse(g: Pose) -> Pose:
    rt = g.rotation.T
    return Pose(rt, -(rt @ g.position))
