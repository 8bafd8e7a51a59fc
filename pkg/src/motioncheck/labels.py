"""Label containers: fused semantics+motion and discrepancy categories."""

from __future__ import annotations

import enum
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .errors import InvalidCategory, LengthMismatch


class DiscrepancyCategory(enum.IntEnum):
    """Agreement state between the supervised and self-supervised streams."""

    GREEN = 0   # both static
    BLUE = 1    # both dynamic
    RED = 2     # supervised static, self-supervised dynamic
    YELLOW = 3  # supervised dynamic, self-supervised static


INVALID_CATEGORY = 255

CATEGORY_NAMES = {
    DiscrepancyCategory.GREEN: "green",
    DiscrepancyCategory.BLUE: "blue",
    DiscrepancyCategory.RED: "red",
    DiscrepancyCategory.YELLOW: "yellow",
}

# Anomaly superclasses; byte codes are 1-based positions in this order.
SUPERCLASSES = (
    "pedestrian",
    "cyclist",
    "vehicle",
    "animal",
    "traffic_facility",
    "obstruction",
    "misc",
)


def category_from_byte(value: int) -> DiscrepancyCategory:
    try:
        return DiscrepancyCategory(value)
    except ValueError:
        raise InvalidCategory(f"byte {value} is not a discrepancy category")


@dataclass
class FusedLabels:
    """Per-point semantic class + boolean motion state + validity mask.

    Invalid points carry no usable motion label; their ``class_ids``
    entries are preserved as read.
    """

    class_ids: np.ndarray
    moving: np.ndarray
    valid: np.ndarray

    def __post_init__(self):
        self.class_ids = np.asarray(self.class_ids, dtype=np.uint16).reshape(-1)
        self.moving = np.asarray(self.moving, dtype=bool).reshape(-1)
        self.valid = np.asarray(self.valid, dtype=bool).reshape(-1)
        n = len(self.class_ids)
        if len(self.moving) != n or len(self.valid) != n:
            raise LengthMismatch(
                f"fused label arrays disagree: classes {n},"
                f" moving {len(self.moving)}, valid {len(self.valid)}"
            )

    def __len__(self) -> int:
        return len(self.class_ids)


@dataclass(frozen=True)
class SemanticMotionLabel:
    """One point's fused label: semantic class plus motion state."""

    class_id: int
    moving: bool


@dataclass
class LabeledScan:
    """All per-point label layers of one scan, each optional.

    Every present layer must have ``n_points`` entries; the
    discrepancy layer may only be set where both streams are valid.
    """

    frame_id: str
    n_points: int
    semantic: Optional[np.ndarray] = None
    motion_sv: Optional[np.ndarray] = None
    fused: Optional["FusedLabels"] = None
    motion_ssv: Optional[np.ndarray] = None
    valid_sv: Optional[np.ndarray] = None
    valid_ssv: Optional[np.ndarray] = None
    discrepancy: Optional[np.ndarray] = None

    def __post_init__(self):
        for name in ("semantic", "motion_sv", "motion_ssv", "valid_sv", "valid_ssv", "discrepancy"):
            layer = getattr(self, name)
            if layer is not None and len(np.asarray(layer).reshape(-1)) != self.n_points:
                raise LengthMismatch(
                    f"layer {name} has {len(np.asarray(layer).reshape(-1))} entries,"
                    f" scan has {self.n_points} points"
                )
        if self.fused is not None and len(self.fused) != self.n_points:
            raise LengthMismatch(
                f"fused layer has {len(self.fused)} entries, scan has {self.n_points}"
            )
        if self.discrepancy is not None:
            disc = np.asarray(self.discrepancy, dtype=np.uint8).reshape(-1)
            if self.valid_sv is not None and (
                (disc != INVALID_CATEGORY) & ~np.asarray(self.valid_sv, dtype=bool)
            ).any():
                raise InvalidCategory("discrepancy set on points invalid in the supervised stream")
            if self.valid_ssv is not None and (
                (disc != INVALID_CATEGORY) & ~np.asarray(self.valid_ssv, dtype=bool)
            ).any():
                raise InvalidCategory(
                    "discrepancy set on points invalid in the self-supervised stream"
                )


@dataclass
class ContradictionCluster:
    """A spatial cluster of points where the two streams disagree."""

    frame_id: str
    cluster_id: int
    category: DiscrepancyCategory
    point_count: int
    centroid: np.ndarray
    semantic_mode: int
    member_indices: Optional[np.ndarray] = None

    def __post_init__(self):
        if self.category not in (DiscrepancyCategory.RED, DiscrepancyCategory.YELLOW):
            raise InvalidCategory(
                f"contradiction cluster category must be red or yellow, got {self.category!r}"
            )
        self.centroid = np.asarray(self.centroid, dtype=np.float64).reshape(3)
        if self.member_indices is not None:
            self.member_indices = np.asarray(self.member_indices, dtype=np.int64).reshape(-1)
            if len(self.member_indices) != self.point_count:
                raise LengthMismatch(
                    f"cluster {self.cluster_id}: point_count {self.point_count}"
                    f" != member count {len(self.member_indices)}"
                )


@dataclass
class MotionLabels:
    """A binary motion labelling with a validity mask (either stream)."""

    moving: np.ndarray
    valid: np.ndarray

    def __post_init__(self):
        self.moving = np.asarray(self.moving, dtype=bool).reshape(-1)
        self.valid = np.asarray(self.valid, dtype=bool).reshape(-1)
        if len(self.moving) != len(self.valid):
            raise LengthMismatch(
                f"moving length {len(self.moving)} != valid length {len(self.valid)}"
            )

    def __len__(self) -> int:
        return len(self.moving)
