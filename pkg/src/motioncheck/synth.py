"""Deterministic synthetic scenes and sequences for tests and demos.

The generated world is a ground plane, a wall, and a handful of box
objects with known classes, motion states, and supervised-label
mistakes, so every pipeline stage has a known expected outcome.
"""

from __future__ import annotations

import struct
import zlib
from dataclasses import dataclass, field
from pathlib import Path
from typing import List, Optional, Tuple

import numpy as np

from .cloud import FlowField, PointCloud
from .flowlabel import CompensatedFlow
from .geometry import RigidTransform, relative_motion
from .io import (
    MOTION_DYNAMIC,
    MOTION_INVALID,
    MOTION_STATIC,
    AnomalyBox,
    AnomalyBoxSet,
    CalibrationSet,
    write_anomaly_boxes,
    write_calibration,
    write_flow,
    write_ground_mask,
    write_motion_labels,
    write_poses,
    write_scan,
    write_semantic_labels,
)
from .labels import MotionLabels
from .preprocess import preprocess

KMH_TO_M_PER_FRAME = 1.0 / 3.6 * 0.1  # at 10 Hz


def box_points(
    center, size, n_points: int, rng: np.random.Generator
) -> np.ndarray:
    """Uniformly sample a solid axis-aligned box."""
    center = np.asarray(center, dtype=np.float64)
    size = np.asarray(size, dtype=np.float64)
    return center + (rng.random((n_points, 3)) - 0.5) * size


def grid_points(x_range, y_range, z, spacing: float) -> np.ndarray:
    """Regular xy grid at constant height."""
    xs = np.arange(x_range[0], x_range[1], spacing)
    ys = np.arange(y_range[0], y_range[1], spacing)
    gx, gy = np.meshgrid(xs, ys, indexing="ij")
    out = np.empty((gx.size, 3))
    out[:, 0] = gx.reshape(-1)
    out[:, 1] = gy.reshape(-1)
    out[:, 2] = z
    return out


def wall_points(x, y_range, z_range, spacing: float) -> np.ndarray:
    """Vertical plane at constant x."""
    ys = np.arange(y_range[0], y_range[1], spacing)
    zs = np.arange(z_range[0], z_range[1], spacing)
    gy, gz = np.meshgrid(ys, zs, indexing="ij")
    out = np.empty((gy.size, 3))
    out[:, 0] = x
    out[:, 1] = gy.reshape(-1)
    out[:, 2] = gz.reshape(-1)
    return out


@dataclass
class ObjectSpec:
    """One synthetic scene element with its labels and world motion."""

    name: str
    points_world0: np.ndarray
    class_id: int
    motion_sv: int  # byte: 0 static, 1 dynamic, 255 unlabeled
    velocity_world: np.ndarray = field(default_factory=lambda: np.zeros(3))
    is_ground: bool = False
    instance_id: int = 0
    anomaly_superclass: Optional[str] = None
    sv_dropout: float = 0.0  # fraction of points left without a motion label

    def points_at(self, frame: int) -> np.ndarray:
        return self.points_world0 + self.velocity_world * frame


def simple_calibration() -> CalibrationSet:
    """Forward camera: f=500 px, 640x480, principal point centered."""
    projection = np.array(
        [[500.0, 0.0, 320.0, 0.0], [0.0, 500.0, 240.0, 0.0], [0.0, 0.0, 1.0, 0.0]]
    )
    lidar_to_cam = RigidTransform(
        np.array([[0.0, -1.0, 0.0], [0.0, 0.0, -1.0], [1.0, 0.0, 0.0]]), np.zeros(3)
    )
    return CalibrationSet(projection, np.eye(3), lidar_to_cam)


IMAGE_SIZE = (640, 480)


def default_objects(seed: int = 7) -> List[ObjectSpec]:
    """The standard five-element scene.

    Supervised mistakes are baked in: the pedestrian is mislabeled
    static, the parked car mislabeled dynamic, and the moving
    obstruction carries a static-by-definition class, so the expected
    discrepancy categories are known per object.
    """
    rng = np.random.default_rng(seed)
    objects = [
        ObjectSpec(
            "ground",
            grid_points((2.0, 34.0), (-7.0, 7.0), -1.7, 0.6),
            class_id=40,
            motion_sv=MOTION_STATIC,
            is_ground=True,
        ),
        ObjectSpec(
            "wall",
            wall_points(20.0, (-4.0, 4.0), (-1.4, 2.0), 0.22),
            class_id=50,
            motion_sv=MOTION_STATIC,
        ),
        ObjectSpec(
            "moving_car",
            box_points((12.0, 2.2, -0.8), (3.6, 1.6, 1.5), 160, rng),
            class_id=10,
            motion_sv=MOTION_DYNAMIC,
            velocity_world=np.array([8.0 * KMH_TO_M_PER_FRAME, 0.0, 0.0]),
            instance_id=1,
        ),
        ObjectSpec(
            "crossing_pedestrian",  # supervised stream misses the motion
            box_points((9.0, -2.5, -0.8), (0.7, 0.7, 1.6), 90, rng),
            class_id=30,
            motion_sv=MOTION_STATIC,
            velocity_world=np.array([0.0, -5.0 * KMH_TO_M_PER_FRAME, 0.0]),
            instance_id=2,
        ),
        ObjectSpec(
            "parked_car",  # supervised stream invents motion
            box_points((14.0, -3.2, -0.8), (3.6, 1.6, 1.5), 160, rng),
            class_id=10,
            motion_sv=MOTION_DYNAMIC,
            instance_id=3,
        ),
        ObjectSpec(
            "runaway_cart",  # static-by-definition class, genuinely moving
            box_points((17.0, -0.5, -0.9), (1.2, 1.0, 1.4), 110, rng),
            class_id=99,
            motion_sv=MOTION_DYNAMIC,
            velocity_world=np.array([1.0, 1.0, 0.0])
            * (6.0 * KMH_TO_M_PER_FRAME / np.sqrt(2.0)),
            instance_id=4,
            anomaly_superclass="obstruction",
            sv_dropout=0.4,
        ),
        ObjectSpec(
            "stray_returns",
            box_points((6.0, 1.5, 0.4), (0.8, 0.8, 0.8), 20, rng),
            class_id=0,  # unlabeled, excluded from the supervised stream
            motion_sv=MOTION_STATIC,
        ),
    ]
    return objects


def ego_poses(n_frames: int, step_m: float = 1.2, yaw_step_deg: float = 0.3) -> List[RigidTransform]:
    """Forward-driving trajectory with mild yaw, first pose = identity."""
    delta = RigidTransform.rotation_z(np.deg2rad(yaw_step_deg)).compose(
        RigidTransform.from_translation((step_m, 0.0, 0.0))
    )
    poses = [RigidTransform.identity()]
    for _ in range(n_frames - 1):
        poses.append(poses[-1].compose(delta))
    return poses


@dataclass
class FrameData:
    """Raw per-frame arrays in sensor coordinates."""

    points: np.ndarray
    class_ids: np.ndarray
    instance_ids: np.ndarray
    motion_sv: np.ndarray
    ground_mask: np.ndarray
    object_index: np.ndarray
    flow_true: np.ndarray  # displacement into next-frame sensor coords


def render_frames(
    objects: List[ObjectSpec],
    poses: List[RigidTransform],
    flow_noise_m: float = 0.004,
    seed: int = 7,
) -> List[FrameData]:
    """Sample every frame's scan and its true forward scene flow."""
    rng = np.random.default_rng(seed + 1)
    frames = []
    for t, pose in enumerate(poses):
        world_to_sensor = pose.inverse()
        pieces, flows = [], []
        class_ids, instance_ids, motion, ground, obj_idx = [], [], [], [], []
        for k, obj in enumerate(objects):
            world = obj.points_at(t)
            sensor = world_to_sensor.apply(world)
            n = len(sensor)
            if t + 1 < len(poses):
                world_next = world + obj.velocity_world
                sensor_next = poses[t + 1].inverse().apply(world_next)
                flow = sensor_next - sensor
                if flow_noise_m > 0:
                    flow = flow + rng.normal(0.0, flow_noise_m, size=flow.shape)
            else:
                flow = np.zeros_like(sensor)
            msv = np.full(n, obj.motion_sv, dtype=np.uint8)
            if obj.sv_dropout > 0:
                drop = rng.random(n) < obj.sv_dropout
                msv[drop] = MOTION_INVALID
            pieces.append(sensor)
            flows.append(flow)
            class_ids.append(np.full(n, obj.class_id, dtype=np.uint16))
            instance_ids.append(np.full(n, obj.instance_id, dtype=np.uint16))
            motion.append(msv)
            ground.append(np.full(n, obj.is_ground, dtype=bool))
            obj_idx.append(np.full(n, k, dtype=np.int64))
        frames.append(
            FrameData(
                points=np.concatenate(pieces),
                class_ids=np.concatenate(class_ids),
                instance_ids=np.concatenate(instance_ids),
                motion_sv=np.concatenate(motion),
                ground_mask=np.concatenate(ground),
                object_index=np.concatenate(obj_idx),
                flow_true=np.concatenate(flows),
            )
        )
    return frames


def write_png(path, image: np.ndarray) -> None:
    """Minimal RGB PNG writer (8-bit, no filtering)."""
    image = np.asarray(image, dtype=np.uint8)
    h, w, _ = image.shape
    raw = b"".join(b"\x00" + image[row].tobytes() for row in range(h))

    def chunk(tag: bytes, payload: bytes) -> bytes:
        return (
            struct.pack(">I", len(payload))
            + tag
            + payload
            + struct.pack(">I", zlib.crc32(tag + payload) & 0xFFFFFFFF)
        )

    header = struct.pack(">IIBBBBB", w, h, 8, 2, 0, 0, 0)
    Path(path).write_bytes(
        b"\x89PNG\r\n\x1a\n"
        + chunk(b"IHDR", header)
        + chunk(b"IDAT", zlib.compress(raw, 6))
        + chunk(b"IEND", b"")
    )


def render_image(
    frame: FrameData, calib: CalibrationSet, image_size: Tuple[int, int]
) -> np.ndarray:
    """Flat backdrop with object returns painted as dark dots."""
    w, h = image_size
    image = np.full((h, w, 3), 168, dtype=np.uint8)
    image[h // 2 :, :] = 140  # ground half slightly darker
    pixels, depth = calib.project(frame.points)
    keep = (
        (depth > 0)
        & (pixels[:, 0] >= 1)
        & (pixels[:, 0] < w - 1)
        & (pixels[:, 1] >= 1)
        & (pixels[:, 1] < h - 1)
        & ~frame.ground_mask
    )
    for u, v in pixels[keep].astype(int):
        image[v - 1 : v + 2, u - 1 : u + 2] = 70
    return image


def generate_sequence(
    root,
    n_frames: int = 5,
    seed: int = 7,
    flow_noise_m: float = 0.004,
    with_images: bool = True,
    max_range_m: float = 35.0,
) -> Path:
    """Write a complete synthetic sequence directory.

    Layout: velodyne/, semantic/, motion_sv/, ground/, flow/, images/,
    poses.txt, calib.txt, boxes.txt, run.cfg. Flow files cover the
    preprocessed points of each non-final frame.
    """
    root = Path(root)
    for sub in ("velodyne", "semantic", "motion_sv", "ground", "flow", "images"):
        (root / sub).mkdir(parents=True, exist_ok=True)

    objects = default_objects(seed)
    poses = ego_poses(n_frames)
    frames = render_frames(objects, poses, flow_noise_m, seed)
    calib = simple_calibration()

    write_poses(root / "poses.txt", poses)
    write_calibration(root / "calib.txt", calib)

    boxes = AnomalyBoxSet()
    for t, frame in enumerate(frames):
        frame_id = f"{t:06d}"
        write_scan(
            root / "velodyne" / f"{frame_id}.bin",
            PointCloud(frame.points, np.full(len(frame.points), 0.5)),
        )
        write_semantic_labels(
            root / "semantic" / f"{frame_id}.label", frame.class_ids, frame.instance_ids
        )
        write_motion_labels(
            root / "motion_sv" / f"{frame_id}.motion",
            MotionLabels(
                frame.motion_sv == MOTION_DYNAMIC, frame.motion_sv != MOTION_INVALID
            ),
        )
        write_ground_mask(root / "ground" / f"{frame_id}.gmask", frame.ground_mask)

        if t + 1 < n_frames:
            pre = preprocess(
                PointCloud(frame.points),
                calib=calib,
                image_size=IMAGE_SIZE,
                max_range_m=max_range_m,
                ground="mask",
                ground_mask=frame.ground_mask,
            )
            write_flow(
                root / "flow" / f"{frame_id}.flow",
                FlowField(frame.flow_true[pre.kept_indices]),
            )

        if with_images:
            write_png(
                root / "images" / f"{frame_id}.png",
                render_image(frame, calib, IMAGE_SIZE),
            )

        for k, obj in enumerate(objects):
            if obj.anomaly_superclass is None:
                continue
            sel = frame.object_index == k
            pixels, depth = calib.project(frame.points[sel])
            ok = depth > 0
            if not ok.any():
                continue
            u, v = pixels[ok, 0], pixels[ok, 1]
            boxes.add(
                AnomalyBox(
                    frame_id,
                    float(u.min() - 4),
                    float(v.min() - 4),
                    float(u.max() + 4),
                    float(v.max() + 4),
                    obj.anomaly_superclass,
                    obj.instance_id,
                )
            )
    write_anomaly_boxes(root / "boxes.txt", boxes)

    (root / "run.cfg").write_text(
        "[camera]\n"
        f"width = {IMAGE_SIZE[0]}\n"
        f"height = {IMAGE_SIZE[1]}\n"
        "\n"
        "[preprocess]\n"
        f"max_range_m = {max_range_m}\n"
        "range_metric = norm3d\n"
        "fov = on\n"
        "ground = mask\n"
        "\n"
        "[flowlabel]\n"
        "spatial_eps_m = 0.5\n"
        "spatial_min_pts = 10\n"
        "flow_eps = 0.1\n"
        "flow_min_pts = 10\n"
        "nstd_threshold = 0.12\n"
        "speed_threshold_kmh = 4.0\n"
        "frame_interval_s = 0.1\n"
        "\n"
        "[discrepancy]\n"
        "cluster_eps_m = 0.5\n"
        "min_cluster_size = 5\n"
        "\n"
        "[transfer]\n"
        "refine_eps_m = 0.5\n"
        "refine_min_pts = 5\n"
    )
    return root


def mover_wall_scene(
    mover_speed_kmh: float,
    n_mover: int = 150,
    mover_noise_frac: float = 0.01,
    wall_noise_m: float = 0.05,
    frame_interval_s: float = 0.1,
    seed: int = 3,
) -> Tuple[PointCloud, CompensatedFlow, np.ndarray]:
    """A rigid mover beside a static wall, residuals built directly.

    The mover's residual is a shared vector with proportional noise;
    the wall's is zero-mean isotropic noise, so the wall clusters
    spatially but fails the dispersion gate. Returns (cloud,
    compensated flow, mover mask).
    """
    rng = np.random.default_rng(seed)
    mover = box_points((8.0, 2.0, 0.0), (1.5, 1.5, 1.5), n_mover, rng)
    wall = wall_points(15.0, (-4.0, 4.0), (-1.0, 2.0), 0.22)
    points = np.concatenate([mover, wall])

    step = mover_speed_kmh / 3.6 * frame_interval_s
    residual = np.zeros_like(points)
    residual[:n_mover] = np.array([step, 0.0, 0.0])
    residual[:n_mover] += rng.normal(
        0.0, mover_noise_frac * step, size=(n_mover, 3)
    )
    residual[n_mover:] = rng.normal(0.0, wall_noise_m, size=(len(wall), 3))

    speed = np.linalg.norm(residual, axis=1) / frame_interval_s
    mask = np.zeros(len(points), dtype=bool)
    mask[:n_mover] = True
    return PointCloud(points), CompensatedFlow(residual, speed), mask
