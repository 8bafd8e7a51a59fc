"""Rigid SE(3) transforms used for poses and ego-motion compensation."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import NonFiniteValue, NonOrthonormalRotation

ROTATION_TOL = 1e-6


def _check_rotation(rotation: np.ndarray, tol: float = ROTATION_TOL) -> None:
    err = np.abs(rotation.T @ rotation - np.eye(3)).max()
    if err > tol:
        raise NonOrthonormalRotation(
            f"rotation is not orthonormal (max deviation {err:.3e})"
        )
    if np.linalg.det(rotation) < 0:
        raise NonOrthonormalRotation("rotation has determinant -1 (reflection)")


@dataclass(frozen=True)
class RigidTransform:
    """Rotation + translation, applied as ``rotation @ p + translation``."""

    rotation: np.ndarray
    translation: np.ndarray

    def __post_init__(self):
        rotation = np.asarray(self.rotation, dtype=np.float64).reshape(3, 3)
        translation = np.asarray(self.translation, dtype=np.float64).reshape(3)
        if not (np.isfinite(rotation).all() and np.isfinite(translation).all()):
            raise NonFiniteValue("transform contains non-finite values")
        _check_rotation(rotation)
        object.__setattr__(self, "rotation", rotation)
        object.__setattr__(self, "translation", translation)

    @classmethod
    def identity(cls) -> "RigidTransform":
        return cls(np.eye(3), np.zeros(3))

    @classmethod
    def from_matrix(cls, matrix: np.ndarray) -> "RigidTransform":
        """Build from a 3x4 or 4x4 matrix [R | t]."""
        matrix = np.asarray(matrix, dtype=np.float64)
        return cls(matrix[:3, :3], matrix[:3, 3])

    @classmethod
    def rotation_z(cls, angle_rad: float) -> "RigidTransform":
        c, s = np.cos(angle_rad), np.sin(angle_rad)
        return cls(np.array([[c, -s, 0.0], [s, c, 0.0], [0.0, 0.0, 1.0]]), np.zeros(3))

    @classmethod
    def from_translation(cls, t) -> "RigidTransform":
        return cls(np.eye(3), np.asarray(t, dtype=np.float64))

    def matrix(self) -> np.ndarray:
        """Homogeneous 4x4 form."""
        m = np.eye(4)
        m[:3, :3] = self.rotation
        m[:3, 3] = self.translation
        return m

    def apply(self, points: np.ndarray) -> np.ndarray:
        """Transform one 3-vector or an (n, 3) batch."""
        points = np.asarray(points, dtype=np.float64)
        if points.ndim == 1:
            return self.rotation @ points + self.translation
        return points @ self.rotation.T + self.translation

    def compose(self, other: "RigidTransform") -> "RigidTransform":
        """Transform applying ``other`` first, then ``self``."""
        return RigidTransform(
            self.rotation @ other.rotation,
            self.rotation @ other.translation + self.translation,
        )

    def inverse(self) -> "RigidTransform":
        return RigidTransform(self.rotation.T, -(self.rotation.T @ self.translation))

    def almost_equal(self, other: "RigidTransform", tol: float = ROTATION_TOL) -> bool:
        """Compare all 12 parameters within ``tol``."""
        return bool(
            np.abs(self.rotation - other.rotation).max() <= tol
            and np.abs(self.translation - other.translation).max() <= tol
        )


def orthonormalize(rotation: np.ndarray) -> np.ndarray:
    """Project a near-rotation onto the closest true rotation (SVD)."""
    u, _, vt = np.linalg.svd(np.asarray(rotation, dtype=np.float64))
    r = u @ vt
    if np.linalg.det(r) < 0:
        u[:, -1] = -u[:, -1]
        r = u @ vt
    return r


def relative_motion(pose_t: RigidTransform, pose_next: RigidTransform) -> RigidTransform:
    """Transform taking frame-(t+1) coordinates into frame-t coordinates.

    Poses are sensor-frame trajectories in a common world frame.
    """
    return pose_t.inverse().compose(pose_next)
