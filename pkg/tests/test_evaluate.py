import json

import numpy as np
import pytest

from motioncheck import (
    ConfusionCounts,
    EmptyGroup,
    LengthMismatch,
    aggregate_by,
    confusion,
    metrics,
    protocol_mask,
)
from motioncheck.evaluate import format_table, report_json
from reference import confusion_bruteforce


def test_confusion_matches_bruteforce():
    rng = np.random.default_rng(0)
    for _ in range(20):
        n = int(rng.integers(1, 500))
        pred = rng.random(n) < 0.4
        gt = rng.random(n) < 0.3
        mask = rng.random(n) < 0.8
        c = confusion(pred, gt, mask)
        ref = confusion_bruteforce(pred, gt, mask)
        assert (c.tp, c.fp, c.fn, c.tn) == (ref["tp"], ref["fp"], ref["fn"], ref["tn"])
        assert c.total == int(mask.sum())


def test_confusion_length_mismatch():
    with pytest.raises(LengthMismatch):
        confusion(np.zeros(3, bool), np.zeros(3, bool), np.zeros(2, bool))


def test_metrics_known_counts():
    # tp=1 fp=1 fn=1: iou 1/3, p 1/2, r 1/2, f1 1/2
    iou, p, r, f1 = metrics(ConfusionCounts(tp=1, fp=1, fn=1, tn=0))
    assert abs(iou - 1 / 3) < 1e-12
    assert p == 0.5 and r == 0.5 and f1 == 0.5


def test_metrics_zero_over_zero_is_zero():
    iou, p, r, f1 = metrics(ConfusionCounts(tp=0, fp=0, fn=0, tn=10))
    assert (iou, p, r, f1) == (0.0, 0.0, 0.0, 0.0)


def test_metrics_perfect():
    iou, p, r, f1 = metrics(ConfusionCounts(tp=5, fp=0, fn=0, tn=5))
    assert (iou, p, r, f1) == (1.0, 1.0, 1.0, 1.0)


def test_protocol_all_vs_both():
    gt_labeled = np.array([True, True, True, False])
    pipeline_labeled = np.array([True, False, True, True])
    np.testing.assert_array_equal(
        protocol_mask("all", gt_labeled, pipeline_labeled), gt_labeled
    )
    np.testing.assert_array_equal(
        protocol_mask("both", gt_labeled, pipeline_labeled),
        [True, False, True, False],
    )
    with pytest.raises(ValueError):
        protocol_mask("table3", gt_labeled, pipeline_labeled)


def test_protocol_all_penalizes_unlabeled_points():
    # Ground truth marks two positives; the pipeline labeled only one of
    # them. Under "all" the unlabeled positive counts as a miss, under
    # "both" it is excluded, so recall differs.
    gt = np.array([True, True, False, False])
    pred = np.array([True, False, False, False])  # point 1 pipeline-unlabeled
    pipeline_labeled = np.array([True, False, True, True])
    gt_labeled = np.ones(4, bool)

    c_all = confusion(pred, gt, protocol_mask("all", gt_labeled, pipeline_labeled))
    c_both = confusion(pred, gt, protocol_mask("both", gt_labeled, pipeline_labeled))
    _, _, r_all, _ = metrics(c_all)
    _, _, r_both, _ = metrics(c_both)
    assert r_all == 0.5
    assert r_both == 1.0


def test_aggregate_by_micro_average_and_rounding():
    counts = {
        "all": [ConfusionCounts(tp=1, fp=1, fn=1, tn=0)],
        "animal": [ConfusionCounts(tp=0, fp=0, fn=0, tn=7)],
        "vehicle": [
            ConfusionCounts(tp=3, fp=1, fn=0, tn=0),
            ConfusionCounts(tp=0, fp=0, fn=2, tn=4),
        ],
    }
    rows = {r["group"]: r for r in aggregate_by(counts)}
    assert rows["all"]["miou"] == 33.3
    assert rows["all"]["mp"] == 50.0
    assert rows["all"]["mr"] == 50.0
    assert rows["all"]["mf1"] == 50.0
    assert rows["all"]["n"] == 3
    # a group with no positives anywhere scores zeros, not NaN
    assert rows["animal"]["miou"] == 0.0
    assert rows["animal"]["n"] == 7
    # micro: counts pooled before the ratio (3 tp, 1 fp, 2 fn)
    assert rows["vehicle"]["miou"] == 50.0
    assert rows["vehicle"]["mr"] == 60.0


def test_aggregate_by_empty_group_raises():
    with pytest.raises(EmptyGroup):
        aggregate_by({})
    with pytest.raises(EmptyGroup):
        aggregate_by({"all": []})


def test_format_table_shape():
    rows = aggregate_by({"all": [ConfusionCounts(tp=1, fp=1, fn=1, tn=0)]})
    text = format_table(rows, "all")
    lines = text.strip().splitlines()
    assert lines[0] == "protocol: all (micro-averaged)"
    assert lines[1].split() == ["group", "n", "mIoU", "mP", "mR", "mF1"]
    assert lines[2].split() == ["all", "3", "33.3", "50.0", "50.0", "50.0"]


def test_report_json_roundtrip():
    rows = aggregate_by({"all": [ConfusionCounts(tp=2, fp=0, fn=0, tn=1)]})
    doc = json.loads(report_json(rows, "both"))
    assert doc["protocol"] == "both"
    assert doc["averaging"] == "micro"
    assert doc["rows"][0]["miou"] == 100.0
