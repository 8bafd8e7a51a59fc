"""Segmentation-style metrics under the two evaluation protocols.

Protocol "all" evaluates every ground-truth-labeled point; points the
pipeline never labeled count as negative predictions, so missed
anomalies become false negatives. Protocol "both" restricts to points
labeled by the pipeline and the ground truth alike.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from typing import Dict, List, Mapping, Sequence, Tuple

import numpy as np

from .errors import EmptyGroup, LengthMismatch

PROTOCOL_ALL = "all"
PROTOCOL_BOTH = "both"


@dataclass
class ConfusionCounts:
    tp: int = 0
    fp: int = 0
    fn: int = 0
    tn: int = 0

    def __add__(self, other: "ConfusionCounts") -> "ConfusionCounts":
        return ConfusionCounts(
            self.tp + other.tp,
            self.fp + other.fp,
            self.fn + other.fn,
            self.tn + other.tn,
        )

    @property
    def total(self) -> int:
        return self.tp + self.fp + self.fn + self.tn


def confusion(pred: np.ndarray, gt: np.ndarray, eval_mask: np.ndarray) -> ConfusionCounts:
    """Count tp/fp/fn/tn over the points selected by ``eval_mask``."""
    pred = np.asarray(pred, dtype=bool).reshape(-1)
    gt = np.asarray(gt, dtype=bool).reshape(-1)
    eval_mask = np.asarray(eval_mask, dtype=bool).reshape(-1)
    if not (len(pred) == len(gt) == len(eval_mask)):
        raise LengthMismatch(
            f"mask lengths differ: pred {len(pred)}, gt {len(gt)}, eval {len(eval_mask)}"
        )
    p, g = pred[eval_mask], gt[eval_mask]
    return ConfusionCounts(
        tp=int((p & g).sum()),
        fp=int((p & ~g).sum()),
        fn=int((~p & g).sum()),
        tn=int((~p & ~g).sum()),
    )


def protocol_mask(
    protocol: str, gt_labeled: np.ndarray, pipeline_labeled: np.ndarray
) -> np.ndarray:
    """Evaluation mask for a protocol name ("all" or "both")."""
    gt_labeled = np.asarray(gt_labeled, dtype=bool)
    pipeline_labeled = np.asarray(pipeline_labeled, dtype=bool)
    if protocol == PROTOCOL_ALL:
        return gt_labeled
    if protocol == PROTOCOL_BOTH:
        return gt_labeled & pipeline_labeled
    raise ValueError(f"unknown protocol {protocol!r} (expected 'all' or 'both')")


def metrics(c: ConfusionCounts) -> Tuple[float, float, float, float]:
    """(iou, precision, recall, f1); 0/0 ratios resolve to 0."""

    def ratio(num: int, den: int) -> float:
        return num / den if den else 0.0

    iou = ratio(c.tp, c.tp + c.fp + c.fn)
    p = ratio(c.tp, c.tp + c.fp)
    r = ratio(c.tp, c.tp + c.fn)
    f1 = ratio(2 * c.tp, 2 * c.tp + c.fp + c.fn)
    return iou, p, r, f1


def aggregate_by(
    counts_by_group: Mapping[str, Sequence[ConfusionCounts]]
) -> List[Dict[str, object]]:
    """Micro-average: sum counts within each group, metrics on the sums.

    Rows carry percentages rounded to one decimal.
    """
    if not counts_by_group:
        raise EmptyGroup("no groups to aggregate")
    rows = []
    for group, counts in counts_by_group.items():
        if not counts:
            raise EmptyGroup(f"group {group!r} has no entries")
        total = ConfusionCounts()
        for c in counts:
            total = total + c
        iou, p, r, f1 = metrics(total)
        rows.append(
            {
                "group": group,
                "n": total.total,
                "miou": round(100.0 * iou, 1),
                "mp": round(100.0 * p, 1),
                "mr": round(100.0 * r, 1),
                "mf1": round(100.0 * f1, 1),
            }
        )
    return rows


def format_table(rows: Sequence[Mapping[str, object]], protocol: str) -> str:
    """Aligned text table mirroring the benchmark column layout."""
    header = ["group", "n", "mIoU", "mP", "mR", "mF1"]
    body = [
        [
            str(r["group"]),
            str(r["n"]),
            f"{r['miou']:.1f}",
            f"{r['mp']:.1f}",
            f"{r['mr']:.1f}",
            f"{r['mf1']:.1f}",
        ]
        for r in rows
    ]
    widths = [max(len(h), *(len(b[i]) for b in body)) if body else len(h)
              for i, h in enumerate(header)]
    lines = [f"protocol: {protocol} (micro-averaged)"]
    lines.append("  ".join(h.ljust(widths[i]) for i, h in enumerate(header)))
    for b in body:
        lines.append("  ".join(b[i].ljust(widths[i]) for i in range(len(header))))
    return "\n".join(lines) + "\n"


def report_json(rows: Sequence[Mapping[str, object]], protocol: str) -> str:
    """Machine-readable report with protocol and averaging recorded."""
    return json.dumps(
        {"protocol": protocol, "averaging": "micro", "rows": list(rows)},
        indent=2,
        sort_keys=True,
    ) + "\n"
