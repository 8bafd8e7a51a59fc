import json

import pytest

from motioncheck.config import PipelineConfig, load_config
from motioncheck.errors import ConfigError


def test_defaults():
    cfg = load_config()
    assert cfg.max_range_m == 35.0
    assert cfg.ground == "mask"
    assert cfg.fov is True
    assert cfg.flowlabel.spatial_eps_m == 0.5
    assert cfg.flowlabel.speed_threshold_kmh == 4.0
    assert cfg.cluster_eps_m == 0.5
    assert cfg.min_cluster_size == 5


def test_file_sections_parsed(tmp_path):
    path = tmp_path / "run.cfg"
    path.write_text(
        "[paths]\n"
        "data_root = /data/seq00\n"
        "[preprocess]\n"
        "max_range_m = 40\n"
        "fov = off\n"
        "ground = ransac\n"
        "[flowlabel]\n"
        "speed_threshold_kmh = 5.5\n"
        "spatial_min_pts = 12\n"
        "[discrepancy]\n"
        "min_cluster_size = 8\n"
    )
    cfg = load_config(path)
    assert cfg.data_root == "/data/seq00"
    assert cfg.max_range_m == 40.0
    assert cfg.fov is False
    assert cfg.ground == "ransac"
    assert cfg.flowlabel.speed_threshold_kmh == 5.5
    assert cfg.flowlabel.spatial_min_pts == 12
    assert cfg.flowlabel.spatial_eps_m == 0.5  # untouched key keeps default
    assert cfg.min_cluster_size == 8


def test_overrides_win_over_file(tmp_path):
    path = tmp_path / "run.cfg"
    path.write_text("[preprocess]\nmax_range_m = 40\n")
    cfg = load_config(path, max_range_m=20.0)
    assert cfg.max_range_m == 20.0
    # None overrides are "not given", they do not reset the file value
    cfg = load_config(path, max_range_m=None)
    assert cfg.max_range_m == 40.0


def test_missing_file_raises(tmp_path):
    with pytest.raises(ConfigError):
        load_config(tmp_path / "absent.cfg")


def test_bad_value_raises(tmp_path):
    path = tmp_path / "run.cfg"
    path.write_text("[preprocess]\nmax_range_m = wide\n")
    with pytest.raises(ConfigError):
        load_config(path)


def test_bad_enum_values_raise():
    with pytest.raises(ConfigError):
        load_config(range_metric="manhattan")
    with pytest.raises(ConfigError):
        load_config(ground="shovel")
    with pytest.raises(ConfigError):
        load_config(no_such_key=1)


def test_canonical_json_excludes_locations():
    a = PipelineConfig(data_root="/a", out_root="/b")
    b = PipelineConfig(data_root="/x", out_root="/y")
    assert a.canonical_json() == b.canonical_json()
    doc = json.loads(a.canonical_json())
    assert "data_root" not in doc and "out_root" not in doc
    assert doc["max_range_m"] == 35.0
    assert doc["flowlabel"]["nstd_threshold"] == 0.12
    # a behavioral setting does flow through
    c = PipelineConfig(max_range_m=20.0)
    assert c.canonical_json() != a.canonical_json()
