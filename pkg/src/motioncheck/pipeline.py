"""Stage orchestration over an on-disk sequence.

Input layout under ``data_root``: velodyne/*.bin, semantic/*.label,
motion_sv/*.motion, flow/*.flow (one fewer than scans), optional
ground/*.gmask, optional images/*.png, poses.txt, calib.txt, optional
boxes.txt. Outputs under ``out_root``: fused/, ssv/, disc/ +
clusters.txt + stats.json, anomaly/, eval/, run_manifest.json.

Every write is atomic (temp file + rename) and every stage is
deterministic, so identical inputs and config give byte-identical
output trees.
"""

from __future__ import annotations

import hashlib
import json
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from pathlib import Path
from typing import Callable, Dict, List, Optional, Sequence

import numpy as np

from . import io
from .classes import SemanticClassTable, read_class_table, semantickitti_table
from .cloud import PointCloud
from .config import PipelineConfig
from .discrepancy import aggregate, classify, extract_clusters
from .errors import ConfigError, EmptyFrustum, FrameCountMismatch, MissingInput
from .evaluate import (
    ConfusionCounts,
    aggregate_by,
    confusion,
    format_table,
    protocol_mask,
    report_json,
)
from .flowlabel import label_motion, compensate
from .fusion import fuse
from .geometry import relative_motion
from .labels import SUPERCLASSES, MotionLabels
from .preprocess import PreprocessResult, preprocess
from .transfer import frustum_select, refine_frustum, sensitivity_masks

PACKAGE_VERSION = "0.1.0"


def _atomic_bytes(path: Path, data: bytes) -> None:
    tmp = path.with_name(path.name + ".tmp")
    tmp.write_bytes(data)
    os.replace(tmp, path)


def _atomic_via(path: Path, writer: Callable[[Path], None]) -> None:
    """Run a file writer against a temp path, then rename into place."""
    tmp = path.with_name(path.name + ".tmp")
    writer(tmp)
    os.replace(tmp, path)


@dataclass
class Sequence:
    """Resolved input paths and the frame list of one sequence."""

    root: Path
    frame_ids: List[str]
    calib: io.CalibrationSet
    poses: List

    def scan(self, fid: str) -> Path:
        return self.root / "velodyne" / f"{fid}.bin"

    def semantic(self, fid: str) -> Path:
        return self.root / "semantic" / f"{fid}.label"

    def motion(self, fid: str) -> Path:
        return self.root / "motion_sv" / f"{fid}.motion"

    def flow(self, fid: str) -> Path:
        return self.root / "flow" / f"{fid}.flow"

    def ground(self, fid: str) -> Path:
        return self.root / "ground" / f"{fid}.gmask"

    def image(self, fid: str) -> Path:
        return self.root / "images" / f"{fid}.png"

    def boxes_path(self) -> Path:
        return self.root / "boxes.txt"


def open_sequence(cfg: PipelineConfig) -> Sequence:
    """Discover frames and load the per-sequence inputs, validating counts."""
    if cfg.data_root is None:
        raise ConfigError("data_root is not set (flag --data-root or [paths] data_root)")
    root = Path(cfg.data_root)
    scans = sorted((root / "velodyne").glob("*.bin"))
    if not scans:
        raise MissingInput(f"no scans found under {root / 'velodyne'}")
    frame_ids = [p.stem for p in scans]

    calib_path = root / "calib.txt"
    if not calib_path.exists():
        raise MissingInput(f"calibration file {calib_path} is missing")
    poses_path = root / "poses.txt"
    if not poses_path.exists():
        raise MissingInput(f"pose file {poses_path} is missing")
    poses = io.read_poses(poses_path)
    if len(poses) != len(frame_ids):
        raise FrameCountMismatch(
            f"{poses_path} has {len(poses)} poses but {len(frame_ids)} scans exist"
        )
    return Sequence(root, frame_ids, io.read_calibration(calib_path), poses)


def load_class_table(cfg: PipelineConfig) -> SemanticClassTable:
    if cfg.class_table is None:
        return semantickitti_table()
    path = Path(cfg.class_table)
    if not path.exists():
        raise MissingInput(f"class table {path} is missing")
    return read_class_table(path)


def _require(path: Path, what: str) -> Path:
    if not path.exists():
        raise MissingInput(f"{what} {path} is missing")
    return path


def _preprocess_frame(cfg: PipelineConfig, seq: Sequence, fid: str, cloud: PointCloud) -> PreprocessResult:
    ground_mask = None
    ground = cfg.ground
    if ground in ("mask", "auto"):
        gpath = seq.ground(fid)
        if gpath.exists():
            ground_mask = io.read_ground_mask(gpath, len(cloud))
            ground = "mask"
        elif ground == "mask":
            raise MissingInput(f"ground mask {gpath} is missing (ground = mask)")
        else:
            ground = "ransac"
    return preprocess(
        cloud,
        calib=seq.calib if cfg.fov else None,
        image_size=(cfg.camera_width, cfg.camera_height) if cfg.fov else None,
        max_range_m=cfg.max_range_m,
        range_metric=cfg.range_metric,
        ground=ground,
        ground_mask=ground_mask,
        seed=cfg.seed,
        downsample=cfg.downsample,
    )


def _map_frames(fn: Callable, items: Sequence, jobs: int) -> List:
    if jobs <= 1:
        return [fn(item) for item in items]
    with ThreadPoolExecutor(max_workers=jobs) as pool:
        return list(pool.map(fn, items))


def _out(cfg: PipelineConfig, *parts: str) -> Path:
    if cfg.out_root is None:
        raise ConfigError("out_root is not set (flag --out-root or [paths] out_root)")
    path = Path(cfg.out_root).joinpath(*parts)
    path.parent.mkdir(parents=True, exist_ok=True)
    return path


# ---------------------------------------------------------------- stages

def run_fuse(cfg: PipelineConfig, jobs: int = 1) -> Dict:
    """Combine semantic and supervised motion labels into fused files."""
    seq = open_sequence(cfg)
    table = load_class_table(cfg)

    def one(fid: str) -> int:
        cloud = io.read_scan(seq.scan(fid))
        sem = io.read_semantic_labels(_require(seq.semantic(fid), "semantic labels"), len(cloud))
        motion = io.read_motion_labels(_require(seq.motion(fid), "motion labels"), len(cloud))
        fused = fuse(sem.class_ids, motion.moving, table, motion.valid)
        _atomic_via(_out(cfg, "fused", f"{fid}.fused"), lambda p: io.write_fused(p, fused))
        return len(cloud)

    counts = _map_frames(one, seq.frame_ids, jobs)
    write_manifest(cfg, seq, "fuse")
    return {"frames": len(counts), "points": int(sum(counts))}


def run_flowlabel(cfg: PipelineConfig, jobs: int = 1) -> Dict:
    """Derive predictive motion labels from flow via two-stage clustering."""
    seq = open_sequence(cfg)
    params = cfg.flowlabel

    def one(t: int) -> int:
        fid = seq.frame_ids[t]
        cloud = io.read_scan(seq.scan(fid))
        n_raw = len(cloud)
        if t + 1 == len(seq.frame_ids):
            # Final frame has no forward flow; everything unlabeled.
            pred = np.full(n_raw, io.MOTION_INVALID, dtype=np.uint8)
            speeds = np.full(n_raw, np.nan)
            _atomic_via(_out(cfg, "ssv", f"{fid}.pred"), lambda p: p.write_bytes(pred.tobytes()))
            _atomic_via(_out(cfg, "ssv", f"{fid}.speed"), lambda p: io.write_speeds(p, speeds))
            _atomic_bytes(_out(cfg, "ssv", f"{fid}.clusters"), b"")
            return 0
        pre = _preprocess_frame(cfg, seq, fid, cloud)
        flow = io.read_flow(_require(seq.flow(fid), "flow field"), len(pre.cloud))
        t_rel = relative_motion(seq.poses[t], seq.poses[t + 1])
        comp = compensate(pre.cloud, flow, t_rel, params.frame_interval_s)
        result = label_motion(pre.cloud, comp, params)

        pred = pre.scatter(
            np.where(result.dynamic, io.MOTION_DYNAMIC, io.MOTION_STATIC).astype(np.uint8),
            n_raw,
            io.MOTION_INVALID,
        )
        speeds = pre.scatter(result.speed_mps, n_raw, np.nan)
        _atomic_via(_out(cfg, "ssv", f"{fid}.pred"), lambda p: p.write_bytes(pred.tobytes()))
        _atomic_via(_out(cfg, "ssv", f"{fid}.speed"), lambda p: io.write_speeds(p, speeds))

        lines = []
        for stage_name, cluster_set in (("spatial", result.stage1), ("flow", result.stage2)):
            for k, stats in enumerate(cluster_set.clusters):
                lines.append(
                    f"{stage_name} {k} {len(stats.member_indices)}"
                    f" {stats.mean_speed_mps:.9g} {stats.normalized_std:.9g}"
                )
        _atomic_bytes(
            _out(cfg, "ssv", f"{fid}.clusters"),
            ("\n".join(lines) + ("\n" if lines else "")).encode(),
        )
        return int(result.dynamic.sum())

    dynamic_counts = _map_frames(one, range(len(seq.frame_ids)), jobs)
    write_manifest(cfg, seq, "flowlabel")
    return {"frames": len(dynamic_counts), "dynamic_points": int(sum(dynamic_counts))}


def run_discrepancy(cfg: PipelineConfig, jobs: int = 1) -> Dict:
    """Compare the two streams; write .disc layers, clusters, statistics."""
    seq = open_sequence(cfg)

    def one(fid: str):
        cloud = io.read_scan(seq.scan(fid))
        n = len(cloud)
        fused = io.read_fused(_require(_out(cfg, "fused", f"{fid}.fused"), "fused labels"), n)
        ssv = io.read_motion_labels(_require(_out(cfg, "ssv", f"{fid}.pred"), "predictive labels"), n)
        categories, stats = classify(MotionLabels(fused.moving, fused.valid), ssv)
        _atomic_via(_out(cfg, "disc", f"{fid}.disc"), lambda p: io.write_discrepancy(p, categories))

        clusters = extract_clusters(
            cloud,
            categories,
            class_ids=fused.class_ids,
            frame_id=fid,
            min_size=cfg.min_cluster_size,
            eps_m=cfg.cluster_eps_m,
        )
        ccid = np.full(n, -1, dtype=np.int32)
        for c in clusters:
            ccid[c.member_indices] = c.cluster_id
        _atomic_via(_out(cfg, "disc", f"{fid}.ccid"), lambda p: io.write_cluster_ids(p, ccid))
        return stats, clusters

    results = _map_frames(one, seq.frame_ids, jobs)
    all_stats = [r[0] for r in results]
    all_clusters = [c for r in results for c in r[1]]
    _atomic_via(
        _out(cfg, "clusters.txt"), lambda p: io.write_cluster_manifest(p, all_clusters)
    )

    fractions = aggregate(all_stats)
    payload = {
        "fractions": fractions,
        "frames": {
            fid: {
                "green": s.green,
                "blue": s.blue,
                "red": s.red,
                "yellow": s.yellow,
                "n_both_valid": s.n_both_valid,
                "n_total": s.n_total,
            }
            for fid, s in zip(seq.frame_ids, all_stats)
        },
    }
    _atomic_bytes(
        _out(cfg, "stats.json"), (json.dumps(payload, indent=2, sort_keys=True) + "\n").encode()
    )
    write_manifest(cfg, seq, "discrepancy")
    return {"frames": len(all_stats), "clusters": len(all_clusters), "fractions": fractions}


def run_transfer(cfg: PipelineConfig, jobs: int = 1) -> Dict:
    """Turn 2D anomaly boxes into per-point 3D anomaly labels."""
    seq = open_sequence(cfg)
    boxes = io.read_anomaly_boxes(_require(seq.boxes_path(), "anomaly boxes"))

    def one(fid: str):
        cloud = io.read_scan(seq.scan(fid))
        pre = _preprocess_frame(cfg, seq, fid, cloud)
        codes = np.zeros(len(pre.cloud), dtype=np.uint8)
        skipped = 0
        for box in boxes.boxes(fid):
            sel = frustum_select(pre.cloud, box, seq.calib)
            try:
                refined = refine_frustum(pre.cloud, sel, cfg.refine_eps_m, cfg.refine_min_pts)
            except EmptyFrustum:
                skipped += 1
                continue
            codes[refined] = box.superclass_code
        raw_codes = pre.scatter(codes, len(cloud), 255)
        _atomic_via(
            _out(cfg, "anomaly", f"{fid}.alabel"), lambda p: io.write_anomaly_labels(p, raw_codes)
        )
        return int((codes != 0).sum()), skipped

    results = _map_frames(one, seq.frame_ids, jobs)
    write_manifest(cfg, seq, "transfer")
    return {
        "frames": len(results),
        "anomaly_points": int(sum(r[0] for r in results)),
        "skipped_boxes": int(sum(r[1] for r in results)),
    }


def run_eval(cfg: PipelineConfig, protocol: str, jobs: int = 1) -> Dict:
    """Score contradiction output against anomaly labels under a protocol."""
    seq = open_sequence(cfg)

    def one(fid: str) -> Dict[str, ConfusionCounts]:
        n = len(io.read_scan(seq.scan(fid)))
        categories = io.read_discrepancy(
            _require(_out(cfg, "disc", f"{fid}.disc"), "discrepancy layer"), n
        )
        codes = io.read_anomaly_labels(
            _require(_out(cfg, "anomaly", f"{fid}.alabel"), "anomaly labels"), n
        )
        pred, gt, pipeline_labeled, gt_labeled = sensitivity_masks(codes, categories)
        mask = protocol_mask(protocol, gt_labeled, pipeline_labeled)
        out = {"all": confusion(pred, gt, mask)}
        for i, name in enumerate(SUPERCLASSES, start=1):
            out[name] = confusion(pred, codes == i, mask)
        return out

    per_frame = _map_frames(one, seq.frame_ids, jobs)
    grouped = {name: [f[name] for f in per_frame] for name in ["all", *SUPERCLASSES]}
    rows = aggregate_by(grouped)
    text = format_table(rows, protocol)
    _atomic_bytes(_out(cfg, "eval", f"report_{protocol}.txt"), text.encode())
    _atomic_bytes(_out(cfg, "eval", f"report_{protocol}.json"), report_json(rows, protocol).encode())
    write_manifest(cfg, seq, f"eval_{protocol}")
    return {"rows": rows, "protocol": protocol}


def run_all(cfg: PipelineConfig, jobs: int = 1) -> Dict:
    """All stages in order; evaluation under both protocols."""
    summary = {
        "fuse": run_fuse(cfg, jobs),
        "flowlabel": run_flowlabel(cfg, jobs),
        "discrepancy": run_discrepancy(cfg, jobs),
    }
    if Path(cfg.data_root or ".").joinpath("boxes.txt").exists():
        summary["transfer"] = run_transfer(cfg, jobs)
        summary["eval_all"] = run_eval(cfg, "all", jobs)
        summary["eval_both"] = run_eval(cfg, "both", jobs)
    write_manifest(cfg, open_sequence(cfg), "all")
    return summary


# ---------------------------------------------------------------- manifest

def _sha256(path: Path) -> str:
    digest = hashlib.sha256()
    with open(path, "rb") as fh:
        for block in iter(lambda: fh.read(1 << 20), b""):
            digest.update(block)
    return digest.hexdigest()


def write_manifest(cfg: PipelineConfig, seq: Sequence, stage: str) -> None:
    """Record config hash, input hashes, and version next to the outputs."""
    inputs = {}
    root = seq.root
    for pattern in (
        "velodyne/*.bin",
        "semantic/*.label",
        "motion_sv/*.motion",
        "flow/*.flow",
        "ground/*.gmask",
        "poses.txt",
        "calib.txt",
        "boxes.txt",
    ):
        for path in sorted(root.glob(pattern)):
            inputs[str(path.relative_to(root))] = _sha256(path)
    if cfg.class_table is not None:
        if Path(cfg.class_table).exists():
            inputs["class_table"] = _sha256(Path(cfg.class_table))
    else:
        from importlib import resources

        with resources.as_file(
            resources.files("motioncheck").joinpath("data/semantickitti_classes.cfg")
        ) as p:
            inputs["class_table"] = _sha256(p)

    manifest = {
        "stage": stage,
        "version": PACKAGE_VERSION,
        "config": json.loads(cfg.canonical_json()),
        "config_sha256": hashlib.sha256(cfg.canonical_json().encode()).hexdigest(),
        "inputs": inputs,
    }
    _atomic_bytes(
        _out(cfg, "run_manifest.json"),
        (json.dumps(manifest, indent=2, sort_keys=True) + "\n").encode(),
    )
