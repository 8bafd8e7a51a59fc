import numpy as np
import pytest

from motioncheck import (
    CompensatedFlow,
    FlowField,
    FlowLabelParams,
    LengthMismatch,
    PointCloud,
    RigidTransform,
    compensate,
    label_motion,
    normalized_std,
)
from motioncheck.geometry import relative_motion
from motioncheck.synth import mover_wall_scene


def random_transform(rng):
    q, _ = np.linalg.qr(rng.normal(size=(3, 3)))
    if np.linalg.det(q) < 0:
        q[:, 0] = -q[:, 0]
    return RigidTransform(rotation=q, translation=rng.normal(size=3))


def test_compensate_matches_scalar_reference():
    rng = np.random.default_rng(0)
    n = 1000
    pts = rng.uniform(-30, 30, size=(n, 3))
    flow = rng.normal(scale=0.5, size=(n, 3))
    t = random_transform(rng)
    comp = compensate(PointCloud(points=pts), FlowField(vectors=flow), t, 0.1)
    for i in range(n):
        warped = t.rotation @ (pts[i] + flow[i]) + t.translation
        residual = warped - pts[i]
        np.testing.assert_allclose(comp.residual[i], residual, atol=1e-6)
        np.testing.assert_allclose(
            comp.speed_mps[i], np.linalg.norm(residual) / 0.1, atol=1e-6
        )


def test_compensate_static_world_residual_vanishes():
    # Points fixed in the world, seen from two poses; flow between the
    # sensor frames is pure ego-motion and must compensate to zero.
    rng = np.random.default_rng(1)
    world = rng.uniform(-20, 20, size=(500, 3))
    pose_t = random_transform(rng)
    pose_next = random_transform(rng)
    x_t = pose_t.inverse().apply(world)
    x_next = pose_next.inverse().apply(world)
    flow = FlowField(vectors=x_next - x_t)
    rel = relative_motion(pose_t, pose_next)
    comp = compensate(PointCloud(points=x_t), flow, rel, 0.1)
    assert comp.speed_mps.max() < 0.01


def test_compensate_recovers_mover_speed():
    rng = np.random.default_rng(2)
    world = rng.uniform(-20, 20, size=(200, 3))
    velocity = np.array([2.0, -1.0, 0.0])  # m/s in world coords
    dt = 0.1
    pose_t = random_transform(rng)
    pose_next = random_transform(rng)
    x_t = pose_t.inverse().apply(world)
    x_next = pose_next.inverse().apply(world + velocity * dt)
    comp = compensate(
        PointCloud(points=x_t),
        FlowField(vectors=x_next - x_t),
        relative_motion(pose_t, pose_next),
        dt,
    )
    np.testing.assert_allclose(
        comp.speed_mps, np.linalg.norm(velocity), atol=1e-9
    )
    # residual direction is the world velocity rotated into the sensor frame
    expected = pose_t.rotation.T @ (velocity * dt)
    assert np.abs(comp.residual - expected).max() < 1e-9


def test_compensate_length_mismatch():
    with pytest.raises(LengthMismatch):
        compensate(
            PointCloud(points=np.zeros((3, 3))),
            FlowField(vectors=np.zeros((2, 3))),
            RigidTransform.identity(),
        )


def test_normalized_std_exact_boundary_value():
    # mean 100, population std 12: the ratio is exactly 0.12
    speeds = np.array([88.0] * 5 + [112.0] * 5)
    assert normalized_std(speeds) == 0.12


def test_normalized_std_zero_mean_sentinel():
    assert normalized_std(np.zeros(5)) == float("inf")
    assert normalized_std(np.full(5, 1e-12)) == float("inf")


def test_normalized_std_constant_speeds():
    assert normalized_std(np.full(8, 3.0)) == 0.0


def test_params_validated():
    with pytest.raises(ValueError):
        FlowLabelParams(spatial_eps_m=0.0)
    with pytest.raises(ValueError):
        FlowLabelParams(speed_threshold_kmh=-1.0)


def test_fast_mover_labeled_dynamic_wall_static():
    cloud, comp, mover = mover_wall_scene(mover_speed_kmh=7.2)
    result = label_motion(cloud, comp)
    assert result.dynamic[mover].all()
    assert not result.dynamic[~mover].any()


def test_slow_mover_stays_static():
    cloud, comp, mover = mover_wall_scene(mover_speed_kmh=3.6)
    result = label_motion(cloud, comp)
    assert not result.dynamic.any()


def test_wall_cluster_rejected_by_consistency_gate():
    cloud, comp, mover = mover_wall_scene(mover_speed_kmh=7.2)
    result = label_motion(cloud, comp)
    wall_idx = np.flatnonzero(~mover)
    # the wall forms a stage-1 cluster whose speeds are too scattered
    wall_clusters = [
        s
        for s in result.stage1.clusters
        if np.isin(s.member_indices, wall_idx).all() and len(s.member_indices) > 100
    ]
    assert wall_clusters, "wall did not form a spatial cluster"
    assert all(s.normalized_std >= 0.3 for s in wall_clusters)


def test_exact_nstd_boundary_is_static():
    # A spatial cluster whose normalized std lands exactly on the
    # threshold must be rejected (the gate is strict <).
    rng = np.random.default_rng(3)
    pts = rng.uniform(0, 0.4, size=(10, 3))
    speeds = np.array([88.0] * 5 + [112.0] * 5)
    residual = np.zeros((10, 3))
    residual[:, 0] = speeds  # frame_interval 1.0 makes speed == residual norm
    comp = CompensatedFlow(residual=residual, speed_mps=speeds)
    params = FlowLabelParams(nstd_threshold=0.12, spatial_min_pts=10, frame_interval_s=1.0)
    result = label_motion(PointCloud(points=pts), comp, params)
    assert len(result.stage1.clusters) == 1
    assert result.stage1.clusters[0].normalized_std == 0.12
    assert not result.dynamic.any()
    assert len(result.stage2_index_map) == 0  # never reached stage 2
    # nudge the threshold up and the same cluster becomes a candidate
    params = FlowLabelParams(nstd_threshold=0.1201, spatial_min_pts=10, frame_interval_s=1.0)
    result = label_motion(PointCloud(points=pts), comp, params)
    assert len(result.stage2_index_map) == 10


def test_exact_speed_boundary_is_static():
    # stage 2 requires mean speed strictly above the km/h threshold
    rng = np.random.default_rng(4)
    pts = rng.uniform(0, 0.4, size=(12, 3))
    speed = 4.0 / 3.6  # exactly 4 km/h
    residual = np.zeros((12, 3))
    residual[:, 0] = speed * 0.1
    comp = CompensatedFlow(residual=residual, speed_mps=np.full(12, speed))
    result = label_motion(PointCloud(points=pts), comp)
    assert not result.dynamic.any()
    comp = CompensatedFlow(
        residual=residual * 1.001, speed_mps=np.full(12, speed * 1.001)
    )
    result = label_motion(PointCloud(points=pts), comp)
    assert result.dynamic.all()


def test_scattered_residuals_rejected_in_stage_two():
    # Consistent speeds pass stage 1, but residual directions too
    # spread out never form a stage-2 cluster, so nothing is dynamic.
    rng = np.random.default_rng(5)
    pts = rng.uniform(0, 0.4, size=(12, 3))
    dirs = rng.normal(size=(12, 3))
    dirs /= np.linalg.norm(dirs, axis=1, keepdims=True)
    residual = dirs * 0.2  # 2 m/s with dense-point spacing >> stage-2 eps
    comp = CompensatedFlow(residual=residual, speed_mps=np.full(12, 2.0))
    result = label_motion(PointCloud(points=pts), comp)
    assert len(result.stage1.clusters) == 1
    assert result.stage1.clusters[0].normalized_std == 0.0
    assert not result.dynamic.any()


def test_stage2_members_map_back_to_cloud_indices():
    cloud, comp, mover = mover_wall_scene(mover_speed_kmh=7.2)
    result = label_motion(cloud, comp)
    mover_idx = set(np.flatnonzero(mover))
    dyn_members = [
        s.member_indices
        for s in result.stage2.clusters
        if s.mean_speed_mps * 3.6 > 4.0
    ]
    assert dyn_members
    for members in dyn_members:
        assert set(members.tolist()) <= mover_idx


def test_label_length_mismatch():
    cloud = PointCloud(points=np.zeros((3, 3)))
    comp = CompensatedFlow(residual=np.zeros((2, 3)), speed_mps=np.zeros(2))
    with pytest.raises(LengthMismatch):
        label_motion(cloud, comp)
