"""Rigid poses with URDF's xyz / fixed-axis roll-pitch-yaw convention."""

import math
from dataclasses import dataclass, field

import numpy as np


def rpy_matrix(roll, pitch, yaw):
    """Rotation Rz(yaw) @ Ry(pitch) @ Rx(roll)."""
    cr, sr = math.cos(roll), math.sin(roll)
    cp, sp = math.cos(pitch), math.sin(pitch)
    cy, sy = math.cos(yaw), math.sin(yaw)
    return np.array([
        [cy * cp, cy * sp * sr - sy * cr, cy * sp * cr + sy * sr],
        [sy * cp, sy * sp * sr + cy * cr, sy * sp * cr - cy * sr],
        [-sp, cp * sr, cp * cr],
    ])


def matrix_rpy(r):
    """Inverse of :func:`rpy_matrix` (yaw absorbs roll at gimbal lock)."""
    sp = -r[2, 0]
    if abs(sp) >= 1.0 - 1e-12:
        pitch = math.copysign(math.pi / 2, sp)
        return 0.0, pitch, math.atan2(-r[0, 1], r[1, 1])
    return math.atan2(r[2, 1], r[2, 2]), math.asin(sp), math.atan2(r[1, 0], r[0, 0])


def axis_angle(axis, angle):
    """Rodrigues rotation about a unit ``axis``."""
    x, y, z = axis
    c, s = math.cos(angle), math.sin(angle)
    t = 1.0 - c
    return np.array([
        [t * x * x + c, t * x * y - s * z, t * x * z + s * y],
        [t * x * y + s * z, t * y * y + c, t * y * z - s * x],
        [t * x * z - s * y, t * y * z + s * x, t * z * z + c],
    ])


@dataclass(frozen=True)
class Pose:
    xyz: tuple = (0.0, 0.0, 0.0)
    rpy: tuple = (0.0, 0.0, 0.0)
    _m: np.ndarray = field(default=None, compare=False, repr=False)

    def __post_init__(self):
        xyz = tuple(float(v) for v in self.xyz)
        rpy = tuple(float(v) for v in self.rpy)
        if len(xyz) != 3 or len(rpy) != 3 or not all(map(math.isfinite, xyz + rpy)):
            raise ValueError("pose needs three finite xyz and rpy values")
        object.__setattr__(self, "xyz", xyz)
        object.__setattr__(self, "rpy", rpy)

    @property
    def matrix(self):
        """4x4 homogeneous transform (a fresh copy)."""
        if self._m is not None:
            return self._m.copy()
        m = np.eye(4)
        m[:3, :3] = rpy_matrix(*self.rpy)
        m[:3, 3] = self.xyz
        return m

    @classmethod
    def from_matrix(cls, m):
        m = np.array(m, dtype=float)
        pose = cls(tuple(m[:3, 3]), matrix_rpy(m[:3, :3]))
        object.__setattr__(pose, "_m", m)
        return pose

    def __matmul__(self, other):
        """Composition: ``(a @ b).matrix == a.matrix @ b.matrix``."""
        return Pose.from_matrix(self.matrix @ other.matrix)

    def apply(self, points):
        m = self.matrix
        return np.asarray(points, dtype=float) @ m[:3, :3].T + m[:3, 3]

    @property
    def is_identity(self):
        return self.xyz == (0.0, 0.0, 0.0) and self.rpy == (0.0, 0.0, 0.0)


IDENTITY = Pose()
