"""Point cloud and scene flow containers."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np

from .errors import LengthMismatch, NonFiniteValue


@dataclass
class PointCloud:
    """An (n, 3) float64 cloud with optional per-point intensity."""

    points: np.ndarray
    intensity: Optional[np.ndarray] = None
    frame_id: Optional[str] = None

    def __post_init__(self):
        self.points = np.asarray(self.points, dtype=np.float64).reshape(-1, 3)
        if not np.isfinite(self.points).all():
            raise NonFiniteValue("point cloud contains non-finite coordinates")
        if self.intensity is not None:
            self.intensity = np.asarray(self.intensity, dtype=np.float64).reshape(-1)
            if len(self.intensity) != len(self.points):
                raise LengthMismatch(
                    f"intensity length {len(self.intensity)} != point count {len(self.points)}"
                )

    def __len__(self) -> int:
        return len(self.points)

    def select(self, indices: np.ndarray) -> "PointCloud":
        """Sub-cloud at ``indices`` (mask or integer index array)."""
        intensity = None if self.intensity is None else self.intensity[indices]
        return PointCloud(self.points[indices], intensity, self.frame_id)


@dataclass
class FlowField:
    """Per-point scene flow vectors, same metric units as the cloud."""

    vectors: np.ndarray
    source_frame: Optional[str] = None
    target_frame: Optional[str] = None

    def __post_init__(self):
        self.vectors = np.asarray(self.vectors, dtype=np.float64).reshape(-1, 3)
        if not np.isfinite(self.vectors).all():
            raise NonFiniteValue("flow field contains non-finite vectors")

    def __len__(self) -> int:
        return len(self.vectors)
