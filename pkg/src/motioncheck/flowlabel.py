"""Self-supervised stream: ego-motion compensation and two-stage clustering.

Stage 1 clusters point positions and keeps clusters whose speed
dispersion (normalized std) is below a threshold as potentially
dynamic. Stage 2 reclusters those points in residual-flow space and
marks clusters moving faster than the speed gate as dynamic.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import List

import numpy as np

from .cloud import FlowField, PointCloud
from .clustering import NOISE, cluster_members, dbscan
from .errors import LengthMismatch
from .geometry import RigidTransform

MPS_TO_KMH = 3.6
ZERO_SPEED_EPS = 1e-9


@dataclass
class FlowLabelParams:
    """Thresholds and clustering parameters for the two-stage labeling."""

    spatial_eps_m: float = 0.5
    spatial_min_pts: int = 10
    flow_eps: float = 0.1
    flow_min_pts: int = 10
    nstd_threshold: float = 0.12
    speed_threshold_kmh: float = 4.0
    frame_interval_s: float = 0.1

    def __post_init__(self):
        for name in (
            "spatial_eps_m",
            "spatial_min_pts",
            "flow_eps",
            "flow_min_pts",
            "nstd_threshold",
            "speed_threshold_kmh",
            "frame_interval_s",
        ):
            if getattr(self, name) <= 0:
                raise ValueError(f"{name} must be positive")


@dataclass
class CompensatedFlow:
    """Residual motion after removing ego-motion from predicted flow."""

    residual: np.ndarray
    speed_mps: np.ndarray

    def __post_init__(self):
        self.residual = np.asarray(self.residual, dtype=np.float64).reshape(-1, 3)
        self.speed_mps = np.asarray(self.speed_mps, dtype=np.float64).reshape(-1)
        assert len(self.residual) == len(self.speed_mps)

    def __len__(self) -> int:
        return len(self.residual)


@dataclass
class ClusterStats:
    """One cluster's members (cloud index space) and speed statistics."""

    member_indices: np.ndarray
    mean_speed_mps: float
    normalized_std: float


@dataclass
class ClusterSet:
    """Per-point cluster assignment plus per-cluster statistics."""

    assignment: np.ndarray
    clusters: List[ClusterStats] = field(default_factory=list)


def compensate(
    cloud: PointCloud,
    flow: FlowField,
    t_next_to_curr: RigidTransform,
    frame_interval_s: float = 0.1,
) -> CompensatedFlow:
    """Remove ego-motion: warp cloud + flow into the current frame.

    The residual is the warped position minus the original point; for
    a static world it vanishes, for true movers it is their motion.
    """
    if len(flow) != len(cloud):
        raise LengthMismatch(f"flow length {len(flow)} != cloud length {len(cloud)}")
    warped = t_next_to_curr.apply(cloud.points + flow.vectors)
    residual = warped - cloud.points
    speed = np.linalg.norm(residual, axis=1) / frame_interval_s
    return CompensatedFlow(residual, speed)


def normalized_std(speeds: np.ndarray) -> float:
    """Population std of speeds over their mean; +inf when mean ~ 0."""
    speeds = np.asarray(speeds, dtype=np.float64)
    mean = speeds.mean()
    if mean < ZERO_SPEED_EPS:
        return float("inf")
    return float(speeds.std() / mean)


def _cluster_set(labels: np.ndarray, speeds: np.ndarray, index_map: np.ndarray) -> ClusterSet:
    assignment = np.full(len(index_map), NOISE, dtype=np.int64)
    stats = []
    for members in cluster_members(labels):
        original = index_map[members]
        stats.append(
            ClusterStats(
                member_indices=original,
                mean_speed_mps=float(speeds[members].mean()),
                normalized_std=normalized_std(speeds[members]),
            )
        )
    assignment[:] = labels
    return ClusterSet(assignment, stats)


@dataclass
class FlowLabelResult:
    """Per-point dynamic flags with both clustering stages kept for audit."""

    dynamic: np.ndarray
    speed_mps: np.ndarray
    stage1: ClusterSet
    stage2: ClusterSet
    stage2_index_map: np.ndarray


def label_motion(
    cloud: PointCloud, comp: CompensatedFlow, params: FlowLabelParams = FlowLabelParams()
) -> FlowLabelResult:
    """Two-stage clustering of compensated flow into static/dynamic."""
    if len(comp) != len(cloud):
        raise LengthMismatch(f"flow length {len(comp)} != cloud length {len(cloud)}")
    n = len(cloud)
    dynamic = np.zeros(n, dtype=bool)

    spatial_labels = dbscan(cloud.points, params.spatial_eps_m, params.spatial_min_pts)
    stage1 = _cluster_set(spatial_labels, comp.speed_mps, np.arange(n))

    candidates = []
    for stats in stage1.clusters:
        if stats.normalized_std < params.nstd_threshold:
            candidates.append(stats.member_indices)
    cand_idx = (
        np.concatenate(candidates) if candidates else np.empty(0, dtype=np.int64)
    )
    cand_idx.sort()

    flow_labels = dbscan(comp.residual[cand_idx], params.flow_eps, params.flow_min_pts)
    stage2 = _cluster_set(flow_labels, comp.speed_mps[cand_idx], cand_idx)

    for stats in stage2.clusters:
        if stats.mean_speed_mps * MPS_TO_KMH > params.speed_threshold_kmh:
            dynamic[stats.member_indices] = True

    return FlowLabelResult(dynamic, comp.speed_mps, stage1, stage2, cand_idx)
