"""Point-wise comparison of the two streams and contradiction clustering."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np

from .cloud import PointCloud
from .clustering import cluster_members, dbscan
from .errors import EmptyCorpus, LengthMismatch
from .labels import (
    INVALID_CATEGORY,
    ContradictionCluster,
    DiscrepancyCategory,
    MotionLabels,
)

DEFAULT_CLUSTER_EPS_M = 0.5
DEFAULT_MIN_CLUSTER_SIZE = 5


@dataclass
class FrameDiscrepancyStats:
    """Per-frame category counts over points valid in both streams."""

    green: int
    blue: int
    red: int
    yellow: int
    n_both_valid: int
    n_total: int

    def __post_init__(self):
        assert self.green + self.blue + self.red + self.yellow == self.n_both_valid
        assert self.n_both_valid <= self.n_total

    def count(self, category: DiscrepancyCategory) -> int:
        return (self.green, self.blue, self.red, self.yellow)[int(category)]


def classify(
    sv: MotionLabels, ssv: MotionLabels
) -> Tuple[np.ndarray, FrameDiscrepancyStats]:
    """Per-point discrepancy bytes (255 where either stream is invalid).

    Static/static is green, dynamic/dynamic blue, supervised-static
    with self-supervised-dynamic red, the reverse yellow.
    """
    if len(sv) != len(ssv):
        raise LengthMismatch(f"stream lengths differ: {len(sv)} vs {len(ssv)}")
    n = len(sv)
    both = sv.valid & ssv.valid
    categories = np.full(n, INVALID_CATEGORY, dtype=np.uint8)
    categories[both & ~sv.moving & ~ssv.moving] = DiscrepancyCategory.GREEN
    categories[both & sv.moving & ssv.moving] = DiscrepancyCategory.BLUE
    categories[both & ~sv.moving & ssv.moving] = DiscrepancyCategory.RED
    categories[both & sv.moving & ~ssv.moving] = DiscrepancyCategory.YELLOW
    stats = FrameDiscrepancyStats(
        green=int((categories == DiscrepancyCategory.GREEN).sum()),
        blue=int((categories == DiscrepancyCategory.BLUE).sum()),
        red=int((categories == DiscrepancyCategory.RED).sum()),
        yellow=int((categories == DiscrepancyCategory.YELLOW).sum()),
        n_both_valid=int(both.sum()),
        n_total=n,
    )
    return categories, stats


def extract_clusters(
    cloud: PointCloud,
    categories: np.ndarray,
    class_ids: Optional[np.ndarray] = None,
    frame_id: str = "",
    min_size: int = DEFAULT_MIN_CLUSTER_SIZE,
    eps_m: float = DEFAULT_CLUSTER_EPS_M,
) -> List[ContradictionCluster]:
    """Spatially cluster red points and yellow points, each on their own.

    Clusters smaller than ``min_size`` are dropped; ids run over red
    clusters first, then yellow.
    """
    categories = np.asarray(categories, dtype=np.uint8).reshape(-1)
    if len(categories) != len(cloud):
        raise LengthMismatch(
            f"categories length {len(categories)} != cloud length {len(cloud)}"
        )
    clusters = []
    next_id = 0
    for category in (DiscrepancyCategory.RED, DiscrepancyCategory.YELLOW):
        subset = np.flatnonzero(categories == category)
        if len(subset) == 0:
            continue
        labels = dbscan(cloud.points[subset], eps_m, min_pts=min_size)
        for members in cluster_members(labels):
            if len(members) < min_size:
                continue
            original = subset[members]
            if class_ids is not None:
                ids, counts = np.unique(
                    np.asarray(class_ids)[original], return_counts=True
                )
                mode = int(ids[counts == counts.max()].min())
            else:
                mode = 0
            clusters.append(
                ContradictionCluster(
                    frame_id=frame_id,
                    cluster_id=next_id,
                    category=category,
                    point_count=len(original),
                    centroid=cloud.points[original].mean(axis=0),
                    semantic_mode=mode,
                    member_indices=original,
                )
            )
            next_id += 1
    return clusters


def aggregate(stats: Sequence[FrameDiscrepancyStats]) -> Dict[str, float]:
    """Corpus-level category fractions over all doubly-valid points."""
    if not stats:
        raise EmptyCorpus("no frames to aggregate")
    total = sum(s.n_both_valid for s in stats)
    if total == 0:
        raise EmptyCorpus("no doubly-valid points in corpus")
    return {
        "green": sum(s.green for s in stats) / total,
        "blue": sum(s.blue for s in stats) / total,
        "red": sum(s.red for s in stats) / total,
        "yellow": sum(s.yellow for s in stats) / total,
    }
