import numpy as np
import pytest

from motioncheck import (
    AnomalyBox,
    EmptyFrustum,
    LengthMismatch,
    PointCloud,
    frustum_select,
    recover_labels,
    refine_frustum,
    sensitivity_masks,
)
from motioncheck.synth import simple_calibration
from reference import nearest_bruteforce


CALIB = simple_calibration()


def test_frustum_select_inclusive_edges():
    # a point dead ahead at 10 m projects to the image center (320, 240)
    cloud = PointCloud(points=np.array([[10.0, 0.0, 0.0]]))
    pix, depth = CALIB.project(cloud.points)
    u, v = pix[0]
    box = AnomalyBox("0", u, v, u + 10, v + 10, "misc", 0)  # point on x1/y1 edge
    np.testing.assert_array_equal(frustum_select(cloud, box, CALIB), [0])
    box = AnomalyBox("0", u - 10, v - 10, u, v, "misc", 0)  # point on x2/y2 edge
    np.testing.assert_array_equal(frustum_select(cloud, box, CALIB), [0])
    box = AnomalyBox("0", u + 1, v, u + 10, v + 10, "misc", 0)  # just outside
    assert len(frustum_select(cloud, box, CALIB)) == 0


def test_frustum_select_drops_points_behind():
    cloud = PointCloud(points=np.array([[10.0, 0.0, 0.0], [-10.0, 0.0, 0.0]]))
    box = AnomalyBox("0", 0, 0, 640, 480, "misc", 0)
    np.testing.assert_array_equal(frustum_select(cloud, box, CALIB), [0])


def test_refine_keeps_nearest_cluster():
    rng = np.random.default_rng(0)
    # object at 8 m, background wall fragment at 25 m, same frustum
    obj = rng.normal(scale=0.1, size=(20, 3)) + [8.0, 0, 0]
    bg = rng.normal(scale=0.1, size=(30, 3)) + [25.0, 0, 0]
    cloud = PointCloud(points=np.vstack([obj, bg]))
    frustum = np.arange(50)
    kept = refine_frustum(cloud, frustum)
    np.testing.assert_array_equal(np.sort(kept), np.arange(20))


def test_refine_empty_frustum_raises():
    with pytest.raises(EmptyFrustum):
        refine_frustum(PointCloud(points=np.zeros((5, 3))), np.array([], np.int64))


def test_refine_all_noise_returns_empty():
    pts = np.array([[0.0, 0, 0], [10.0, 0, 0], [20.0, 0, 0]])
    out = refine_frustum(PointCloud(points=pts), np.arange(3), min_pts=3)
    assert out.shape == (0,)


def test_recover_labels_matches_bruteforce():
    rng = np.random.default_rng(1)
    accumulated = rng.uniform(-10, 10, size=(300, 3))
    labels = rng.integers(0, 8, size=300).astype(np.uint8)
    raw = accumulated[rng.choice(300, size=100)] + rng.normal(scale=0.02, size=(100, 3))
    got, unmatched = recover_labels(
        PointCloud(points=accumulated), labels, PointCloud(points=raw), max_dist_m=0.2
    )
    idx, dist = nearest_bruteforce(raw, accumulated)
    np.testing.assert_array_equal(got, labels[idx])
    np.testing.assert_array_equal(unmatched, dist > 0.2)
    assert not unmatched.any()  # all raw points were jittered accumulated points


def test_recover_labels_flags_distant_points():
    accumulated = PointCloud(points=np.zeros((1, 3)))
    raw = PointCloud(points=np.array([[0.05, 0, 0], [3.0, 0, 0]]))
    labels, unmatched = recover_labels(accumulated, np.array([7], np.uint8), raw)
    np.testing.assert_array_equal(labels, [7, 7])
    np.testing.assert_array_equal(unmatched, [False, True])


def test_recover_labels_monotone_in_radius():
    # growing the match radius can only shrink the unmatched set
    rng = np.random.default_rng(2)
    accumulated = PointCloud(points=rng.uniform(-5, 5, size=(100, 3)))
    raw = PointCloud(points=rng.uniform(-5, 5, size=(200, 3)))
    labels = np.zeros(100, np.uint8)
    counts = []
    for radius in (0.05, 0.2, 0.5, 2.0):
        _, unmatched = recover_labels(accumulated, labels, raw, max_dist_m=radius)
        counts.append(int(unmatched.sum()))
    assert counts == sorted(counts, reverse=True)


def test_recover_labels_validation():
    with pytest.raises(LengthMismatch):
        recover_labels(
            PointCloud(points=np.zeros((2, 3))), np.zeros(3), PointCloud(points=np.zeros((1, 3)))
        )
    with pytest.raises(ValueError):
        recover_labels(
            PointCloud(points=np.zeros((0, 3))), np.zeros(0), PointCloud(points=np.zeros((1, 3)))
        )


def test_sensitivity_masks():
    cats = np.array([0, 1, 2, 3, 255], np.uint8)
    codes = np.array([0, 6, 6, 0, 255], np.uint8)
    pred, gt, pipeline_labeled, anomaly_labeled = sensitivity_masks(codes, cats)
    np.testing.assert_array_equal(pred, [False, False, True, True, False])
    np.testing.assert_array_equal(gt, [False, True, True, False, False])
    np.testing.assert_array_equal(pipeline_labeled, [True, True, True, True, False])
    np.testing.assert_array_equal(anomaly_labeled, [True, True, True, True, False])
    with pytest.raises(LengthMismatch):
        sensitivity_masks(codes[:3], cats)
