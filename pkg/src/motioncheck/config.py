"""Pipeline configuration: INI file with per-stage sections, flags override."""

from __future__ import annotations

import configparser
import json
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import Dict, Optional

from .errors import ConfigError
from .flowlabel import FlowLabelParams


@dataclass
class PipelineConfig:
    """Resolved settings for every pipeline stage."""

    data_root: Optional[str] = None
    out_root: Optional[str] = None
    class_table: Optional[str] = None  # None = bundled SemanticKITTI table

    camera_width: int = 640
    camera_height: int = 480

    max_range_m: float = 35.0
    range_metric: str = "norm3d"
    fov: bool = True
    ground: str = "mask"
    downsample: Optional[int] = None
    seed: int = 0

    flowlabel: FlowLabelParams = field(default_factory=FlowLabelParams)

    cluster_eps_m: float = 0.5
    min_cluster_size: int = 5

    refine_eps_m: float = 0.5
    refine_min_pts: int = 5

    def canonical_json(self) -> str:
        """Stable serialized form used for the run-manifest hash.

        Filesystem locations are excluded: they do not change output
        bytes, and the manifest covers data identity via input
        hashes. This keeps reruns comparable across directories.
        """
        data = asdict(self)
        for key in ("data_root", "out_root", "class_table"):
            data.pop(key, None)
        return json.dumps(data, sort_keys=True)


_BOOL = {"on": True, "off": False, "true": True, "false": False, "1": True, "0": False}


def _get(parser, section, key, cast, current):
    if not parser.has_option(section, key):
        return current
    raw = parser.get(section, key)
    try:
        if cast is bool:
            return _BOOL[raw.strip().lower()]
        return cast(raw)
    except (ValueError, KeyError):
        raise ConfigError(f"[{section}] {key} = {raw!r} is not a valid {cast.__name__}")


def load_config(path=None, **overrides) -> PipelineConfig:
    """Read an INI config; keyword overrides win over the file."""
    cfg = PipelineConfig()
    if path is not None:
        path = Path(path)
        if not path.exists():
            raise ConfigError(f"config file {path} does not exist")
        parser = configparser.ConfigParser()
        try:
            parser.read(path)
        except configparser.Error as e:
            raise ConfigError(f"{path}: {e}")

        cfg.data_root = _get(parser, "paths", "data_root", str, cfg.data_root)
        cfg.out_root = _get(parser, "paths", "out_root", str, cfg.out_root)
        cfg.class_table = _get(parser, "paths", "class_table", str, cfg.class_table)

        cfg.camera_width = _get(parser, "camera", "width", int, cfg.camera_width)
        cfg.camera_height = _get(parser, "camera", "height", int, cfg.camera_height)

        cfg.max_range_m = _get(parser, "preprocess", "max_range_m", float, cfg.max_range_m)
        cfg.range_metric = _get(parser, "preprocess", "range_metric", str, cfg.range_metric)
        cfg.fov = _get(parser, "preprocess", "fov", bool, cfg.fov)
        cfg.ground = _get(parser, "preprocess", "ground", str, cfg.ground)
        cfg.downsample = _get(parser, "preprocess", "downsample", int, cfg.downsample)
        cfg.seed = _get(parser, "preprocess", "seed", int, cfg.seed)

        fl = {}
        for key, cast in (
            ("spatial_eps_m", float),
            ("spatial_min_pts", int),
            ("flow_eps", float),
            ("flow_min_pts", int),
            ("nstd_threshold", float),
            ("speed_threshold_kmh", float),
            ("frame_interval_s", float),
        ):
            fl[key] = _get(parser, "flowlabel", key, cast, getattr(cfg.flowlabel, key))
        cfg.flowlabel = FlowLabelParams(**fl)

        cfg.cluster_eps_m = _get(
            parser, "discrepancy", "cluster_eps_m", float, cfg.cluster_eps_m
        )
        cfg.min_cluster_size = _get(
            parser, "discrepancy", "min_cluster_size", int, cfg.min_cluster_size
        )
        cfg.refine_eps_m = _get(parser, "transfer", "refine_eps_m", float, cfg.refine_eps_m)
        cfg.refine_min_pts = _get(parser, "transfer", "refine_min_pts", int, cfg.refine_min_pts)

    for key, value in overrides.items():
        if value is None:
            continue
        if not hasattr(cfg, key):
            raise ConfigError(f"unknown config override {key!r}")
        setattr(cfg, key, value)

    if cfg.range_metric not in ("norm3d", "xy"):
        raise ConfigError(f"range_metric must be norm3d or xy, got {cfg.range_metric!r}")
    if cfg.ground not in ("mask", "ransac", "off", "auto"):
        raise ConfigError(f"ground must be mask/ransac/off/auto, got {cfg.ground!r}")
    return cfg
