import numpy as np
import pytest

from motioncheck import MaskLengthMismatch, PointCloud, fov_filter, preprocess, range_filter, remove_ground
from motioncheck.preprocess import fit_ground_plane
from motioncheck.synth import IMAGE_SIZE, simple_calibration


def test_range_filter_inclusive_boundary():
    pts = np.array([[34.999, 0, 0], [35.0, 0, 0], [35.001, 0, 0]])
    idx = range_filter(PointCloud(points=pts), 35.0)
    np.testing.assert_array_equal(idx, [0, 1])


def test_range_filter_xy_ignores_height():
    pts = np.array([[30.0, 0, 40.0], [30.0, 20.0, 0.0]])
    idx = range_filter(PointCloud(points=pts), 35.0, metric="xy")
    np.testing.assert_array_equal(idx, [0])
    with pytest.raises(ValueError):
        range_filter(PointCloud(points=pts), 35.0, metric="taxicab")


def test_fov_filter_drops_behind_and_outside():
    calib = simple_calibration()
    pts = np.array(
        [
            [10.0, 0.0, 0.0],    # straight ahead: center pixel
            [-10.0, 0.0, 0.0],   # behind the camera
            [10.0, 40.0, 0.0],   # far off to the side
        ]
    )
    idx = fov_filter(PointCloud(points=pts), calib, IMAGE_SIZE)
    np.testing.assert_array_equal(idx, [0])


def test_remove_ground_with_mask():
    pts = np.zeros((4, 3))
    idx = remove_ground(PointCloud(points=pts), np.array([True, False, True, False]))
    np.testing.assert_array_equal(idx, [1, 3])
    with pytest.raises(MaskLengthMismatch):
        remove_ground(PointCloud(points=pts), np.array([True, False]))


def test_ground_plane_fit_recovers_tilted_plane():
    rng = np.random.default_rng(5)
    xy = rng.uniform(-10, 10, size=(400, 2))
    # plane z = 0.05 x - 1.6, light noise
    z = 0.05 * xy[:, 0] - 1.6 + rng.normal(scale=0.02, size=400)
    ground = np.column_stack([xy, z])
    tall = rng.uniform(-5, 5, size=(60, 2))
    obj = np.column_stack([tall, rng.uniform(0.5, 2.0, size=60)])
    pts = np.vstack([ground, obj])
    normal, d = fit_ground_plane(pts, seed=1)
    expected = np.array([-0.05, 0.0, 1.0])
    expected /= np.linalg.norm(expected)
    assert abs(normal @ expected) > 0.999
    idx = remove_ground(PointCloud(points=pts), seed=1)
    # every surviving point should be an object point
    assert set(idx).issubset(set(range(400, 460)))
    assert len(idx) >= 55


def test_preprocess_kept_indices_compose():
    rng = np.random.default_rng(6)
    calib = simple_calibration()
    pts = rng.uniform([-5, -10, -2], [50, 10, 3], size=(500, 3))
    res = preprocess(
        PointCloud(points=pts), calib, IMAGE_SIZE, max_range_m=35.0, ground="off"
    )
    # the kept cloud is exactly the raw points at kept_indices
    np.testing.assert_allclose(res.cloud.points, pts[res.kept_indices])
    assert res.ground_mask_source is None
    # every kept point passes both filters
    pix, depth = calib.project(res.cloud.points)
    assert (depth > 0).all()
    assert (np.linalg.norm(res.cloud.points, axis=1) <= 35.0).all()


def test_preprocess_mask_given_at_raw_length():
    pts = np.array([[10.0, 0, -1.7], [12.0, 0, 0.5], [100.0, 0, 0.5], [11.0, 1, 0.2]])
    mask = np.array([True, False, False, False])  # raw-length mask
    res = preprocess(PointCloud(points=pts), ground="mask", ground_mask=mask)
    assert res.ground_mask_source == "external_mask"
    np.testing.assert_array_equal(res.kept_indices, [1, 3])


def test_preprocess_mask_mode_requires_mask():
    with pytest.raises(MaskLengthMismatch):
        preprocess(PointCloud(points=np.zeros((3, 3))), ground="mask")


def test_preprocess_downsample_deterministic():
    rng = np.random.default_rng(7)
    pts = rng.uniform(-20, 20, size=(300, 3))
    a = preprocess(PointCloud(points=pts), ground="off", downsample=50, seed=11)
    b = preprocess(PointCloud(points=pts), ground="off", downsample=50, seed=11)
    np.testing.assert_array_equal(a.kept_indices, b.kept_indices)
    assert len(a.cloud) == 50
    # order preserved
    assert (np.diff(a.kept_indices) > 0).all()


def test_scatter_restores_raw_length():
    pts = np.arange(30, dtype=float).reshape(10, 3)
    res = preprocess(PointCloud(points=pts), max_range_m=1e9, ground="off")
    layer = np.arange(len(res.cloud), dtype=np.uint8)
    out = res.scatter(layer, 10, fill=255)
    assert len(out) == 10
    np.testing.assert_array_equal(out[res.kept_indices], layer)
