import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

from motioncheck.config import load_config
from motioncheck.pipeline import run_all
from motioncheck.synth import generate_sequence


@pytest.fixture(scope="session")
def synthetic_sequence(tmp_path_factory):
    """One generated 5-frame sequence shared by the slower tests."""
    root = tmp_path_factory.mktemp("seq") / "seq00"
    generate_sequence(root, n_frames=5, seed=7)
    return root


@pytest.fixture(scope="session")
def pipeline_run(synthetic_sequence, tmp_path_factory):
    """Full pipeline output over the shared sequence."""
    out = tmp_path_factory.mktemp("out") / "run"
    cfg = load_config(
        synthetic_sequence / "run.cfg",
        data_root=str(synthetic_sequence),
        out_root=str(out),
    )
    summary = run_all(cfg)
    return cfg, out, summary
