"""Scan preprocessing: camera-FOV filter, range cutoff, ground removal.

Each filter returns indices into its input cloud; ``preprocess`` composes
them and reports indices into the raw scan.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional, Tuple

import numpy as np

from .cloud import PointCloud
from .errors import MaskLengthMismatch
from .io import CalibrationSet

DEFAULT_MAX_RANGE_M = 35.0
RANSAC_THRESHOLD_M = 0.2
RANSAC_ITERATIONS = 200


@dataclass
class PreprocessResult:
    """Filtered cloud plus the map back to raw scan indices."""

    kept_indices: np.ndarray
    cloud: PointCloud
    ground_mask_source: Optional[str]

    def __post_init__(self):
        self.kept_indices = np.asarray(self.kept_indices, dtype=np.int64).reshape(-1)
        assert len(self.kept_indices) == len(self.cloud)

    def scatter(self, layer: np.ndarray, n_raw: int, fill) -> np.ndarray:
        """Expand a filtered per-point layer to raw scan length."""
        layer = np.asarray(layer)
        out = np.full((n_raw,) + layer.shape[1:], fill, dtype=layer.dtype)
        out[self.kept_indices] = layer
        return out


def fov_filter(
    cloud: PointCloud, calib: CalibrationSet, image_size: Tuple[int, int]
) -> np.ndarray:
    """Indices of points projecting inside the image with positive depth."""
    w, h = image_size
    pixels, depth = calib.project(cloud.points)
    keep = (
        (depth > 0)
        & (pixels[:, 0] >= 0)
        & (pixels[:, 0] < w)
        & (pixels[:, 1] >= 0)
        & (pixels[:, 1] < h)
    )
    return np.flatnonzero(keep)


def range_filter(
    cloud: PointCloud, max_range_m: float = DEFAULT_MAX_RANGE_M, metric: str = "norm3d"
) -> np.ndarray:
    """Indices of points within ``max_range_m`` (inclusive)."""
    if metric == "norm3d":
        dist = np.linalg.norm(cloud.points, axis=1)
    elif metric == "xy":
        dist = np.linalg.norm(cloud.points[:, :2], axis=1)
    else:
        raise ValueError(f"unknown range metric {metric!r}")
    return np.flatnonzero(dist <= max_range_m)


def fit_ground_plane(
    points: np.ndarray,
    threshold_m: float = RANSAC_THRESHOLD_M,
    iterations: int = RANSAC_ITERATIONS,
    seed: int = 0,
) -> Tuple[np.ndarray, float]:
    """RANSAC single-plane fit; returns (unit normal with nz >= 0, offset d).

    Plane is {p : normal . p + d = 0}; signed distance is normal . p + d.
    """
    rng = np.random.default_rng(seed)
    n = len(points)
    if n < 3:
        raise ValueError("ground plane fit needs at least 3 points")
    best_normal, best_d, best_count = None, 0.0, -1
    for _ in range(iterations):
        idx = rng.choice(n, size=3, replace=False)
        a, b, c = points[idx]
        normal = np.cross(b - a, c - a)
        norm = np.linalg.norm(normal)
        if norm < 1e-12:
            continue
        normal = normal / norm
        if normal[2] < 0:
            normal = -normal
        d = -float(normal @ a)
        count = int((np.abs(points @ normal + d) <= threshold_m).sum())
        if count > best_count:
            best_normal, best_d, best_count = normal, d, count
    if best_normal is None:
        raise ValueError("all RANSAC samples were collinear")
    return best_normal, best_d


def remove_ground(
    cloud: PointCloud,
    ground_mask: Optional[np.ndarray] = None,
    threshold_m: float = RANSAC_THRESHOLD_M,
    iterations: int = RANSAC_ITERATIONS,
    seed: int = 0,
) -> np.ndarray:
    """Indices of non-ground points.

    An external mask (True = ground) wins when given; otherwise a
    seeded RANSAC plane fit drops everything at or below plane height
    + threshold.
    """
    if ground_mask is not None:
        ground_mask = np.asarray(ground_mask, dtype=bool).reshape(-1)
        if len(ground_mask) != len(cloud):
            raise MaskLengthMismatch(
                f"ground mask length {len(ground_mask)} != point count {len(cloud)}"
            )
        return np.flatnonzero(~ground_mask)
    normal, d = fit_ground_plane(cloud.points, threshold_m, iterations, seed)
    signed = cloud.points @ normal + d
    return np.flatnonzero(signed > threshold_m)


def preprocess(
    cloud: PointCloud,
    calib: Optional[CalibrationSet] = None,
    image_size: Optional[Tuple[int, int]] = None,
    max_range_m: float = DEFAULT_MAX_RANGE_M,
    range_metric: str = "norm3d",
    ground: str = "auto",
    ground_mask: Optional[np.ndarray] = None,
    seed: int = 0,
    downsample: Optional[int] = None,
) -> PreprocessResult:
    """FOV filter, then range filter, then ground removal.

    ``ground``: "auto" uses the mask when given else plane fit, "mask"
    requires one, "ransac" forces the fit, "off" skips removal.
    Optional ``downsample`` keeps a seeded uniform subset of at most
    that many points, preserving index order.
    """
    kept = np.arange(len(cloud), dtype=np.int64)
    current = cloud

    if calib is not None and image_size is not None:
        idx = fov_filter(current, calib, image_size)
        kept = kept[idx]
        current = current.select(idx)

    idx = range_filter(current, max_range_m, range_metric)
    kept = kept[idx]
    current = current.select(idx)

    if ground == "auto":
        ground = "off" if (ground_mask is None and len(current) < 3) else (
            "mask" if ground_mask is not None else "ransac"
        )
    if ground == "mask":
        if ground_mask is None:
            raise MaskLengthMismatch("ground='mask' but no mask provided")
        mask_here = np.asarray(ground_mask, dtype=bool).reshape(-1)
        if len(mask_here) == len(cloud):
            mask_here = mask_here[kept]
        idx = remove_ground(current, mask_here)
        kept = kept[idx]
        current = current.select(idx)
        source = "external_mask"
    elif ground == "ransac":
        idx = remove_ground(current, None, seed=seed)
        kept = kept[idx]
        current = current.select(idx)
        source = "plane_fit"
    elif ground == "off":
        source = None
    else:
        raise ValueError(f"unknown ground mode {ground!r}")

    if downsample is not None and len(kept) > downsample:
        rng = np.random.default_rng(seed)
        pick = np.sort(rng.choice(len(kept), size=downsample, replace=False))
        kept = kept[pick]
        current = current.select(pick)

    return PreprocessResult(kept, current, source)
