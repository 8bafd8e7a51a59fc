"""Checks on the synthetic scene generator the other tests lean on."""

import numpy as np

from motioncheck import read_class_table, semantickitti_table
from motioncheck.io import (
    read_anomaly_boxes,
    read_calibration,
    read_ground_mask,
    read_poses,
    read_scan,
    read_semantic_labels,
)
from motioncheck.synth import IMAGE_SIZE, default_objects, mover_wall_scene


def test_sequence_layout_complete(synthetic_sequence):
    root = synthetic_sequence
    for sub in ("velodyne", "semantic", "motion_sv", "ground", "flow", "images"):
        assert (root / sub).is_dir(), sub
    for name in ("poses.txt", "calib.txt", "boxes.txt", "run.cfg"):
        assert (root / name).is_file(), name
    scans = sorted((root / "velodyne").glob("*.bin"))
    assert len(scans) == 5
    # every frame has matching per-point layers
    for scan in scans:
        fid = scan.stem
        cloud = read_scan(scan)
        labels = read_semantic_labels(root / "semantic" / f"{fid}.label", len(cloud))
        assert len(labels) == len(cloud)
        mask = read_ground_mask(root / "ground" / f"{fid}.gmask", len(cloud))
        assert mask.any() and not mask.all()
        assert (root / "images" / f"{fid}.png").stat().st_size > 100
    # flow exists for all frames but the last
    flows = sorted((root / "flow").glob("*.flow"))
    assert [f.stem for f in flows] == [s.stem for s in scans[:-1]]


def test_poses_parse_and_advance(synthetic_sequence):
    poses = read_poses(synthetic_sequence / "poses.txt")
    assert len(poses) == 5
    steps = [
        np.linalg.norm(b.translation - a.translation)
        for a, b in zip(poses, poses[1:])
    ]
    np.testing.assert_allclose(steps, 1.2, atol=0.01)


def test_calibration_parses(synthetic_sequence):
    calib = read_calibration(synthetic_sequence / "calib.txt")
    assert calib.projection[0, 0] == 500.0
    # a forward point lands mid-image
    pix, depth = calib.project(np.array([[10.0, 0.0, 0.0]]))
    assert depth[0] > 0
    assert 0 <= pix[0, 0] < IMAGE_SIZE[0]
    assert 0 <= pix[0, 1] < IMAGE_SIZE[1]


def test_boxes_cover_the_anomaly_object(synthetic_sequence):
    boxes = read_anomaly_boxes(synthetic_sequence / "boxes.txt")
    assert len(boxes) > 0
    for image_id, items in boxes.by_image.items():
        for b in items:
            assert b.superclass == "obstruction"


def test_semantic_ids_known_to_the_bundled_table(synthetic_sequence):
    table = semantickitti_table()
    labels = read_semantic_labels(
        synthetic_sequence / "semantic" / "000000.label",
        len(read_scan(synthetic_sequence / "velodyne" / "000000.bin")),
    )
    for cid in np.unique(labels.class_ids):
        table.kind(int(cid))  # raises if the id is unmapped and no default


def test_default_objects_cover_the_label_outcomes():
    names = {o.name for o in default_objects()}
    assert {"ground", "wall", "moving_car", "crossing_pedestrian", "parked_car", "runaway_cart"} <= names


def test_mover_wall_scene_masks():
    cloud, comp, mover = mover_wall_scene(mover_speed_kmh=7.2)
    assert len(cloud) == len(comp.speed_mps) == len(mover)
    assert mover.sum() == 150
    # mover speeds sit near the requested speed, wall speeds scatter
    np.testing.assert_allclose(comp.speed_mps[mover], 2.0, rtol=0.1)
