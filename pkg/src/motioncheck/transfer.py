"""2D anomaly boxes to 3D point labels: frustum selection, cluster
refinement, nearest-neighbor label recovery, evaluation masks."""

from __future__ import annotations

from typing import Optional, Tuple

import numpy as np
from scipy.spatial import cKDTree

from .cloud import PointCloud
from .clustering import NOISE, dbscan
from .errors import EmptyFrustum, LengthMismatch
from .io import AnomalyBox, CalibrationSet
from .labels import INVALID_CATEGORY, DiscrepancyCategory


def frustum_select(
    cloud: PointCloud,
    box: AnomalyBox,
    calib: CalibrationSet,
    image_size: Optional[Tuple[int, int]] = None,
) -> np.ndarray:
    """Indices of points with positive depth projecting inside the box.

    Box edges are inclusive. ``image_size`` additionally clips to the
    image when given.
    """
    pixels, depth = calib.project(cloud.points)
    u, v = pixels[:, 0], pixels[:, 1]
    keep = (depth > 0) & (u >= box.x1) & (u <= box.x2) & (v >= box.y1) & (v <= box.y2)
    if image_size is not None:
        w, h = image_size
        keep &= (u >= 0) & (u < w) & (v >= 0) & (v < h)
    return np.flatnonzero(keep)


def refine_frustum(
    cloud: PointCloud,
    frustum_indices: np.ndarray,
    eps_m: float = 0.5,
    min_pts: int = 5,
) -> np.ndarray:
    """Keep only the frustum cluster nearest the sensor.

    A frustum catches the object plus anything behind it; the closest
    cluster is taken as the object. NOISE points are dropped.
    """
    frustum_indices = np.asarray(frustum_indices, dtype=np.int64).reshape(-1)
    if len(frustum_indices) == 0:
        raise EmptyFrustum("no points in frustum")
    points = cloud.points[frustum_indices]
    labels = dbscan(points, eps_m, min_pts)
    n_clusters = int(labels.max()) + 1 if labels.max() >= 0 else 0
    if n_clusters == 0:
        return np.empty(0, dtype=np.int64)
    ranges = [
        np.linalg.norm(points[labels == k].mean(axis=0)) for k in range(n_clusters)
    ]
    best = int(np.argmin(ranges))
    return frustum_indices[labels == best]


def recover_labels(
    accumulated: PointCloud,
    accumulated_labels: np.ndarray,
    raw: PointCloud,
    max_dist_m: float = 0.2,
) -> Tuple[np.ndarray, np.ndarray]:
    """Carry labels from an accumulated cloud onto a raw scan.

    Each raw point takes the label of its exact nearest accumulated
    neighbor when that neighbor is within ``max_dist_m``; the second
    return is the unmatched mask.
    """
    accumulated_labels = np.asarray(accumulated_labels)
    if len(accumulated_labels) != len(accumulated):
        raise LengthMismatch(
            f"labels {len(accumulated_labels)} != accumulated points {len(accumulated)}"
        )
    if len(accumulated) == 0:
        raise ValueError("accumulated cloud is empty")
    tree = cKDTree(accumulated.points)
    dist, nearest = tree.query(raw.points, k=1)
    unmatched = dist > max_dist_m
    labels = accumulated_labels[nearest].copy()
    return labels, unmatched


def sensitivity_masks(
    anomaly_codes: np.ndarray, categories: np.ndarray
) -> Tuple[np.ndarray, np.ndarray, np.ndarray, np.ndarray]:
    """Prediction/ground-truth masks for the anomaly benchmarks.

    Prediction is positive where the streams contradict (red or
    yellow); ground truth where the anomaly code is a superclass.
    Also returns per-point labeled masks: pipeline-labeled (category
    not 255) and anomaly-labeled (code not 255).
    """
    anomaly_codes = np.asarray(anomaly_codes, dtype=np.uint8).reshape(-1)
    categories = np.asarray(categories, dtype=np.uint8).reshape(-1)
    if len(anomaly_codes) != len(categories):
        raise LengthMismatch(
            f"anomaly layer {len(anomaly_codes)} != discrepancy layer {len(categories)}"
        )
    pred = (categories == DiscrepancyCategory.RED) | (
        categories == DiscrepancyCategory.YELLOW
    )
    gt = (anomaly_codes != 0) & (anomaly_codes != 255)
    pipeline_labeled = categories != INVALID_CATEGORY
    anomaly_labeled = anomaly_codes != 255
    return pred, gt, pipeline_labeled, anomaly_labeled
