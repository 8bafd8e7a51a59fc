"""Byte-level regression checks over the committed mini sequence.

The fixture inputs are committed; running the pipeline over them must
reproduce the recorded output hashes exactly. A failure here means
output bytes moved: either a regression, or an intentional change that
calls for tests/fixtures/regenerate.py and a reviewed golden diff.
"""

import hashlib
import json
from pathlib import Path

import pytest

from motioncheck.config import load_config
from motioncheck.pipeline import run_all

FIXTURES = Path(__file__).parent / "fixtures"
SEQ = FIXTURES / "mini_seq"
GOLDENS = json.loads((FIXTURES / "golden_hashes.json").read_text())


def sha256(path: Path) -> str:
    return hashlib.sha256(path.read_bytes()).hexdigest()


def test_fixture_inputs_unchanged():
    found = {
        str(p.relative_to(SEQ)): sha256(p) for p in sorted(SEQ.rglob("*")) if p.is_file()
    }
    assert found == GOLDENS["inputs"]


@pytest.fixture(scope="module")
def golden_out(tmp_path_factory):
    out = tmp_path_factory.mktemp("golden") / "out"
    cfg = load_config(SEQ / "run.cfg", data_root=str(SEQ), out_root=str(out))
    run_all(cfg)
    return out


def test_pipeline_outputs_match_goldens(golden_out):
    found = {
        str(p.relative_to(golden_out)): sha256(p)
        for p in sorted(golden_out.rglob("*"))
        if p.is_file() and p.name != "run_manifest.json"
    }
    assert set(found) == set(GOLDENS["outputs"])
    mismatched = [rel for rel, h in found.items() if GOLDENS["outputs"][rel] != h]
    assert mismatched == []


def test_cluster_manifest_matches_golden_text(golden_out):
    assert (golden_out / "clusters.txt").read_text() == (
        FIXTURES / "golden_clusters.txt"
    ).read_text()


def test_stats_match_golden_text(golden_out):
    assert (golden_out / "stats.json").read_text() == (
        FIXTURES / "golden_stats.json"
    ).read_text()
