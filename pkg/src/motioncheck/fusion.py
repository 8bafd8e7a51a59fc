"""Supervised stream: combine semantic class ids with motion labels."""

from __future__ import annotations

from typing import Optional

import numpy as np

from .classes import MotionKind, SemanticClassTable
from .errors import LengthMismatch
from .labels import FusedLabels, MotionLabels


def fuse(
    class_ids: np.ndarray,
    motion_sv: np.ndarray,
    table: SemanticClassTable,
    motion_valid: Optional[np.ndarray] = None,
) -> FusedLabels:
    """Fuse per-point class ids with a binary motion layer.

    Classes that are static by definition force motion to static;
    potentially dynamic classes take ``motion_sv``; ignore classes are
    marked invalid, as are points where ``motion_valid`` is false.
    """
    class_ids = np.asarray(class_ids).reshape(-1)
    motion_sv = np.asarray(motion_sv, dtype=bool).reshape(-1)
    if len(class_ids) != len(motion_sv):
        raise LengthMismatch(
            f"class ids {len(class_ids)} != motion labels {len(motion_sv)}"
        )
    if motion_valid is None:
        motion_valid = np.ones(len(class_ids), dtype=bool)
    else:
        motion_valid = np.asarray(motion_valid, dtype=bool).reshape(-1)
        if len(motion_valid) != len(class_ids):
            raise LengthMismatch(
                f"motion validity {len(motion_valid)} != class ids {len(class_ids)}"
            )

    unique = np.unique(class_ids)
    kind_of = {int(c): table.kind(int(c)) for c in unique}

    moving = motion_sv.copy()
    valid = motion_valid.copy()
    for c, kind in kind_of.items():
        sel = class_ids == c
        if kind == MotionKind.STATIC_BY_DEFINITION:
            moving[sel] = False
        elif kind == MotionKind.IGNORE:
            valid[sel] = False
    moving[~valid] = False
    return FusedLabels(class_ids, moving, valid)


def fused_motion(fused: FusedLabels) -> MotionLabels:
    """The motion component of a fused layer, for discrepancy input."""
    return MotionLabels(fused.moving, fused.valid)
