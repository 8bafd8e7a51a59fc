"""Bit-exact readers and writers for scans, labels, flow, poses, calibration, boxes.

Binary formats are little-endian and fixed width per point:
scan ``.bin`` 16 B (x, y, z, intensity float32), label ``.label`` 4 B
(uint32, low 16 bits class, high 16 instance), flow ``.flow`` 12 B,
discrepancy ``.disc`` 1 B, motion / ground / anomaly layers 1 B.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from pathlib import Path
from typing import Dict, List, Optional, Sequence, Tuple, Union

import numpy as np

from .cloud import FlowField, PointCloud
from .errors import (
    DegenerateBox,
    InvalidCategory,
    LengthMismatch,
    MalformedLine,
    NonFiniteValue,
    NonOrthonormalRotation,
    TruncatedFile,
    UnknownSuperclass,
)
from .geometry import ROTATION_TOL, RigidTransform, orthonormalize
from .labels import (
    INVALID_CATEGORY,
    SUPERCLASSES,
    ContradictionCluster,
    DiscrepancyCategory,
    FusedLabels,
    MotionLabels,
)

PathLike = Union[str, Path]

POSE_TOL = 1e-4

MOTION_STATIC = 0
MOTION_DYNAMIC = 1
MOTION_INVALID = 255


def _read_bytes(path: PathLike) -> bytes:
    return Path(path).read_bytes()


def _expect_multiple(path: PathLike, n_bytes: int, record: int) -> int:
    if n_bytes % record != 0:
        raise TruncatedFile(
            f"{path}: {n_bytes} bytes is not a multiple of the {record}-byte record"
        )
    return n_bytes // record


def _expect_count(path: PathLike, got: int, expected: int) -> None:
    if got != expected:
        raise LengthMismatch(f"{path}: {got} records, expected {expected}")


# ---------------------------------------------------------------- scans

def read_scan(path: PathLike) -> PointCloud:
    """Read a 16-byte-per-point binary scan."""
    raw = _read_bytes(path)
    n = _expect_multiple(path, len(raw), 16)
    data = np.frombuffer(raw, dtype="<f4").reshape(n, 4)
    if not np.isfinite(data).all():
        raise NonFiniteValue(f"{path}: scan contains NaN or Inf")
    return PointCloud(data[:, :3].astype(np.float64), data[:, 3].astype(np.float64))


def write_scan(path: PathLike, cloud: PointCloud) -> None:
    data = np.empty((len(cloud), 4), dtype="<f4")
    data[:, :3] = cloud.points
    data[:, 3] = 0.0 if cloud.intensity is None else cloud.intensity
    Path(path).write_bytes(data.tobytes())


# ---------------------------------------------------------------- semantic labels

@dataclass
class SemanticLabels:
    """Per-point class ids with the instance ids packed alongside them."""

    class_ids: np.ndarray
    instance_ids: np.ndarray

    def __len__(self) -> int:
        return len(self.class_ids)


def read_semantic_labels(path: PathLike, n_points: int) -> SemanticLabels:
    """Read packed uint32 labels: low 16 bits class id, high 16 instance id."""
    raw = _read_bytes(path)
    n = _expect_multiple(path, len(raw), 4)
    _expect_count(path, n, n_points)
    packed = np.frombuffer(raw, dtype="<u4")
    return SemanticLabels(
        (packed & 0xFFFF).astype(np.uint16), (packed >> 16).astype(np.uint16)
    )


def write_semantic_labels(
    path: PathLike, class_ids: np.ndarray, instance_ids: Optional[np.ndarray] = None
) -> None:
    class_ids = np.asarray(class_ids, dtype=np.uint32)
    packed = class_ids & 0xFFFF
    if instance_ids is not None:
        packed = packed | (np.asarray(instance_ids, dtype=np.uint32) << 16)
    Path(path).write_bytes(packed.astype("<u4").tobytes())


# ---------------------------------------------------------------- poses

def read_poses(path: PathLike) -> List[RigidTransform]:
    """Read one row-major 3x4 pose per line.

    Rotations must be orthonormal within 1e-4; noisy ones are
    projected onto the nearest exact rotation, already-clean ones are
    kept verbatim so write/read round trips preserve bytes.
    """
    poses = []
    for lineno, raw in enumerate(Path(path).read_text().splitlines(), start=1):
        if not raw.strip():
            continue
        parts = raw.split()
        if len(parts) != 12:
            raise MalformedLine(f"{path}:{lineno}: expected 12 numbers, got {len(parts)}")
        try:
            values = np.array([float(p) for p in parts], dtype=np.float64)
        except ValueError:
            raise MalformedLine(f"{path}:{lineno}: non-numeric token")
        if not np.isfinite(values).all():
            raise MalformedLine(f"{path}:{lineno}: non-finite value")
        m = values.reshape(3, 4)
        r = m[:, :3]
        err = np.abs(r.T @ r - np.eye(3)).max()
        if err > POSE_TOL or np.linalg.det(r) < 0:
            raise NonOrthonormalRotation(
                f"{path}:{lineno}: rotation block deviates by {err:.3e} (tolerance {POSE_TOL})"
            )
        if err > ROTATION_TOL:
            r = orthonormalize(r)
        poses.append(RigidTransform(r, m[:, 3]))
    return poses


def write_poses(path: PathLike, poses: Sequence[RigidTransform]) -> None:
    lines = []
    for pose in poses:
        m = np.hstack([pose.rotation, pose.translation.reshape(3, 1)])
        lines.append(" ".join(f"{v:.17g}" for v in m.reshape(-1)))
    Path(path).write_text("\n".join(lines) + "\n")


# ---------------------------------------------------------------- flow

def read_flow(path: PathLike, n_points: int) -> FlowField:
    """Read per-point flow vectors, 3 float32 each."""
    raw = _read_bytes(path)
    n = _expect_multiple(path, len(raw), 12)
    _expect_count(path, n, n_points)
    vectors = np.frombuffer(raw, dtype="<f4").reshape(n, 3)
    if not np.isfinite(vectors).all():
        raise NonFiniteValue(f"{path}: flow contains NaN or Inf")
    return FlowField(vectors.astype(np.float64))


def write_flow(path: PathLike, flow: FlowField) -> None:
    Path(path).write_bytes(flow.vectors.astype("<f4").tobytes())


# ---------------------------------------------------------------- byte layers

def _read_byte_layer(path: PathLike, n_points: int) -> np.ndarray:
    raw = _read_bytes(path)
    _expect_count(path, len(raw), n_points)
    return np.frombuffer(raw, dtype=np.uint8)


def read_discrepancy(path: PathLike, n_points: int) -> np.ndarray:
    """Read per-point discrepancy bytes (0..3 categories, 255 invalid)."""
    values = _read_byte_layer(path, n_points)
    bad = ~(np.isin(values, [0, 1, 2, 3, INVALID_CATEGORY]))
    if bad.any():
        raise InvalidCategory(
            f"{path}: byte {int(values[bad.argmax()])} at index {int(bad.argmax())}"
            " is not a discrepancy category"
        )
    return values.copy()


def write_discrepancy(path: PathLike, categories: np.ndarray) -> None:
    Path(path).write_bytes(np.asarray(categories, dtype=np.uint8).tobytes())


def read_motion_labels(path: PathLike, n_points: int) -> MotionLabels:
    """Read a 1-byte motion layer: 0 static, 1 dynamic, 255 unlabeled."""
    values = _read_byte_layer(path, n_points)
    bad = ~np.isin(values, [MOTION_STATIC, MOTION_DYNAMIC, MOTION_INVALID])
    if bad.any():
        raise InvalidCategory(
            f"{path}: byte {int(values[bad.argmax()])} is not a motion label"
        )
    return MotionLabels(values == MOTION_DYNAMIC, values != MOTION_INVALID)


def write_motion_labels(path: PathLike, labels: MotionLabels) -> None:
    values = np.where(labels.moving, MOTION_DYNAMIC, MOTION_STATIC).astype(np.uint8)
    values[~labels.valid] = MOTION_INVALID
    Path(path).write_bytes(values.tobytes())


def read_ground_mask(path: PathLike, n_points: int) -> np.ndarray:
    """Read a 1-byte ground layer (1 = ground) as a boolean mask."""
    values = _read_byte_layer(path, n_points)
    bad = ~np.isin(values, [0, 1])
    if bad.any():
        raise InvalidCategory(f"{path}: byte {int(values[bad.argmax()])} is not a ground flag")
    return values == 1


def write_ground_mask(path: PathLike, mask: np.ndarray) -> None:
    Path(path).write_bytes(np.asarray(mask, dtype=bool).astype(np.uint8).tobytes())


def read_anomaly_labels(path: PathLike, n_points: int) -> np.ndarray:
    """Read per-point anomaly bytes (0 normal, 1..7 superclass, 255 unlabeled)."""
    values = _read_byte_layer(path, n_points)
    bad = ~(np.isin(values, np.arange(len(SUPERCLASSES) + 1)) | (values == 255))
    if bad.any():
        raise UnknownSuperclass(
            f"{path}: byte {int(values[bad.argmax()])} is not a superclass code"
        )
    return values.copy()


def write_anomaly_labels(path: PathLike, codes: np.ndarray) -> None:
    Path(path).write_bytes(np.asarray(codes, dtype=np.uint8).tobytes())


# ---------------------------------------------------------------- fused labels

_FUSED_MOTION_BIT = np.uint32(1 << 16)
_FUSED_VALID_BIT = np.uint32(1 << 17)


def read_fused(path: PathLike, n_points: int) -> FusedLabels:
    """Read packed fused labels: class id in bits 0..15, motion bit 16, valid bit 17."""
    raw = _read_bytes(path)
    n = _expect_multiple(path, len(raw), 4)
    _expect_count(path, n, n_points)
    packed = np.frombuffer(raw, dtype="<u4")
    return FusedLabels(
        (packed & 0xFFFF).astype(np.uint16),
        (packed & _FUSED_MOTION_BIT) != 0,
        (packed & _FUSED_VALID_BIT) != 0,
    )


def write_fused(path: PathLike, fused: FusedLabels) -> None:
    packed = fused.class_ids.astype(np.uint32)
    packed = packed | np.where(fused.moving, _FUSED_MOTION_BIT, np.uint32(0))
    packed = packed | np.where(fused.valid, _FUSED_VALID_BIT, np.uint32(0))
    Path(path).write_bytes(packed.astype("<u4").tobytes())


# ---------------------------------------------------------------- sidecars

def read_speeds(path: PathLike, n_points: int) -> np.ndarray:
    """Read a per-point float32 speed layer; NaN marks unlabeled points."""
    raw = _read_bytes(path)
    n = _expect_multiple(path, len(raw), 4)
    _expect_count(path, n, n_points)
    return np.frombuffer(raw, dtype="<f4").astype(np.float64)


def write_speeds(path: PathLike, speeds: np.ndarray) -> None:
    Path(path).write_bytes(np.asarray(speeds, dtype="<f4").tobytes())


def read_cluster_ids(path: PathLike, n_points: int) -> np.ndarray:
    """Read a per-point int32 cluster-id layer; -1 means no cluster."""
    raw = _read_bytes(path)
    n = _expect_multiple(path, len(raw), 4)
    _expect_count(path, n, n_points)
    return np.frombuffer(raw, dtype="<i4").copy()


def write_cluster_ids(path: PathLike, cluster_ids: np.ndarray) -> None:
    Path(path).write_bytes(np.asarray(cluster_ids, dtype="<i4").tobytes())


# ---------------------------------------------------------------- calibration

@dataclass
class CalibrationSet:
    """Camera projection, rectification, and lidar-to-camera extrinsics."""

    projection: np.ndarray
    rect: np.ndarray
    lidar_to_cam: RigidTransform

    def __post_init__(self):
        self.projection = np.asarray(self.projection, dtype=np.float64).reshape(3, 4)
        if self.projection[0, 0] == 0.0 or self.projection[1, 1] == 0.0:
            raise MalformedLine("projection matrix has zero focal terms")
        rect = np.asarray(self.rect, dtype=np.float64)
        if rect.shape == (3, 3):
            padded = np.eye(4)
            padded[:3, :3] = rect
            rect = padded
        self.rect = rect.reshape(4, 4)
        r = self.rect[:3, :3]
        err = np.abs(r.T @ r - np.eye(3)).max()
        if err > POSE_TOL:
            raise NonOrthonormalRotation(
                f"rectification rotation deviates by {err:.3e} (tolerance {POSE_TOL})"
            )

    def project(self, points: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
        """Project lidar-frame points to pixels.

        Returns (pixels (n, 2), depth (n,)); pixels are NaN where
        depth <= 0.
        """
        points = np.asarray(points, dtype=np.float64).reshape(-1, 3)
        cam = self.lidar_to_cam.apply(points) @ self.rect[:3, :3].T
        hom = cam @ self.projection[:, :3].T + self.projection[:, 3]
        depth = cam[:, 2]
        pixels = np.full((len(points), 2), np.nan)
        front = depth > 0
        pixels[front] = hom[front, :2] / hom[front, 2:3]
        return pixels, depth


def read_calibration(path: PathLike) -> CalibrationSet:
    """Parse a key-value calibration file with P2, R0_rect, and Tr entries."""
    entries = {}
    for lineno, raw in enumerate(Path(path).read_text().splitlines(), start=1):
        line = raw.strip()
        if not line or ":" not in line:
            continue
        key, _, rest = line.partition(":")
        try:
            entries[key.strip()] = np.array([float(t) for t in rest.split()])
        except ValueError:
            raise MalformedLine(f"{path}:{lineno}: non-numeric calibration value")
    required = {"P2": 12, "R0_rect": 9, "Tr": 12}
    for key, count in required.items():
        if key not in entries:
            raise MalformedLine(f"{path}: missing calibration key {key!r}")
        if entries[key].size != count:
            raise MalformedLine(
                f"{path}: key {key!r} has {entries[key].size} values, expected {count}"
            )
    tr = entries["Tr"].reshape(3, 4)
    r = tr[:, :3]
    err = np.abs(r.T @ r - np.eye(3)).max()
    if err > POSE_TOL or np.linalg.det(r) < 0:
        raise NonOrthonormalRotation(
            f"{path}: Tr rotation deviates by {err:.3e} (tolerance {POSE_TOL})"
        )
    return CalibrationSet(
        entries["P2"].reshape(3, 4),
        entries["R0_rect"].reshape(3, 3),
        RigidTransform(orthonormalize(r), tr[:, 3]),
    )


def write_calibration(path: PathLike, calib: CalibrationSet) -> None:
    tr = np.hstack([calib.lidar_to_cam.rotation, calib.lidar_to_cam.translation.reshape(3, 1)])
    lines = [
        "P2: " + " ".join(f"{v:.17g}" for v in calib.projection.reshape(-1)),
        "R0_rect: " + " ".join(f"{v:.17g}" for v in calib.rect[:3, :3].reshape(-1)),
        "Tr: " + " ".join(f"{v:.17g}" for v in tr.reshape(-1)),
    ]
    Path(path).write_text("\n".join(lines) + "\n")


# ---------------------------------------------------------------- anomaly boxes

@dataclass
class AnomalyBox:
    """A 2D pixel-space rectangle with its superclass and instance id."""

    image_id: str
    x1: float
    y1: float
    x2: float
    y2: float
    superclass: str
    instance_id: int

    def __post_init__(self):
        if self.superclass not in SUPERCLASSES:
            raise UnknownSuperclass(f"superclass {self.superclass!r} not in {SUPERCLASSES}")
        if not (self.x2 > self.x1 and self.y2 > self.y1):
            raise DegenerateBox(
                f"box ({self.x1}, {self.y1})-({self.x2}, {self.y2}) has no area"
            )

    @property
    def superclass_code(self) -> int:
        return SUPERCLASSES.index(self.superclass) + 1


@dataclass
class AnomalyBoxSet:
    """Anomaly boxes grouped by image id."""

    by_image: Dict[str, List[AnomalyBox]] = field(default_factory=dict)

    def add(self, box: AnomalyBox) -> None:
        self.by_image.setdefault(box.image_id, []).append(box)

    def boxes(self, image_id: str) -> List[AnomalyBox]:
        return self.by_image.get(image_id, [])

    def __len__(self) -> int:
        return sum(len(v) for v in self.by_image.values())


def read_anomaly_boxes(path: PathLike) -> AnomalyBoxSet:
    """Parse box records: ``image_id x1 y1 x2 y2 superclass instance_id``."""
    boxes = AnomalyBoxSet()
    for lineno, raw in enumerate(Path(path).read_text().splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        parts = line.split()
        if len(parts) != 7:
            raise MalformedLine(f"{path}:{lineno}: expected 7 fields, got {len(parts)}")
        try:
            coords = [float(v) for v in parts[1:5]]
            instance_id = int(parts[6])
        except ValueError:
            raise MalformedLine(f"{path}:{lineno}: non-numeric box field")
        boxes.add(AnomalyBox(parts[0], *coords, parts[5], instance_id))
    return boxes


def write_anomaly_boxes(path: PathLike, boxes: AnomalyBoxSet) -> None:
    lines = []
    for image_id in boxes.by_image:
        for b in boxes.by_image[image_id]:
            lines.append(
                f"{b.image_id} {b.x1:.17g} {b.y1:.17g} {b.x2:.17g} {b.y2:.17g}"
                f" {b.superclass} {b.instance_id}"
            )
    Path(path).write_text("\n".join(lines) + ("\n" if lines else ""))


# ---------------------------------------------------------------- cluster manifest

def read_cluster_manifest(path: PathLike) -> List[ContradictionCluster]:
    """Parse cluster records:
    ``frame_id cluster_id category point_count cx cy cz semantic_mode``.
    """
    clusters = []
    names = {"red": DiscrepancyCategory.RED, "yellow": DiscrepancyCategory.YELLOW}
    for lineno, raw in enumerate(Path(path).read_text().splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        parts = line.split()
        if len(parts) != 8:
            raise MalformedLine(f"{path}:{lineno}: expected 8 fields, got {len(parts)}")
        if parts[2] not in names:
            raise InvalidCategory(f"{path}:{lineno}: category {parts[2]!r} is not red/yellow")
        try:
            clusters.append(
                ContradictionCluster(
                    frame_id=parts[0],
                    cluster_id=int(parts[1]),
                    category=names[parts[2]],
                    point_count=int(parts[3]),
                    centroid=np.array([float(v) for v in parts[4:7]]),
                    semantic_mode=int(parts[7]),
                )
            )
        except ValueError:
            raise MalformedLine(f"{path}:{lineno}: non-numeric cluster field")
    return clusters


def write_cluster_manifest(path: PathLike, clusters: Sequence[ContradictionCluster]) -> None:
    lines = []
    for c in clusters:
        name = "red" if c.category == DiscrepancyCategory.RED else "yellow"
        lines.append(
            f"{c.frame_id} {c.cluster_id} {name} {c.point_count}"
            f" {c.centroid[0]:.17g} {c.centroid[1]:.17g} {c.centroid[2]:.17g}"
            f" {c.semantic_mode}"
        )
    Path(path).write_text("\n".join(lines) + ("\n" if lines else ""))
