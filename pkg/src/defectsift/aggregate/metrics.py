"""Confusion matrix and summary classification metrics."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.stats import rankdata

from ..errors import LengthMismatch


@dataclass(frozen=True)
class ConfusionMatrix:
    tp: int
    fp: int
    tn: int
    fn: int

    @property
    def total(self) -> int:
        return self.tp + self.fp + self.tn + self.fn


def roc_auc(scores, labels) -> float:
    """Mann-Whitney AUC with average ranks for ties; 0.5 when one class is absent."""
    s = np.asarray(scores, dtype=float)
    y = np.asarray(labels).astype(np.int64)
    n1 = int(y.sum())
    n0 = y.size - n1
    if n1 == 0 or n0 == 0:
        return 0.5
    r = rankdata(s)
    return float((r[y == 1].sum() - n1 * (n1 + 1) / 2.0) / (n1 * n0))


def evaluate(predictions, scores, labels) -> dict:
    p = np.asarray(predictions).astype(np.int64)
    s = np.asarray(scores, dtype=float)
    y = np.asarray(labels).astype(np.int64)
    if not (p.size == s.size == y.size):
        raise LengthMismatch("predictions, scores and labels must have equal length")
    cm = ConfusionMatrix(
        int(np.sum((p == 1) & (y == 1))),
        int(np.sum((p == 1) & (y == 0))),
        int(np.sum((p == 0) & (y == 0))),
        int(np.sum((p == 0) & (y == 1))),
    )
    precision = cm.tp / (cm.tp + cm.fp) if cm.tp + cm.fp else 0.0
    recall = cm.tp / (cm.tp + cm.fn) if cm.tp + cm.fn else 0.0
    f1 = 2 * precision * recall / (precision + recall) if precision + recall else 0.0
    return {
        "confusion": {"tp": cm.tp, "fp": cm.fp, "tn": cm.tn, "fn": cm.fn},
        "accuracy": (cm.tp + cm.tn) / cm.total if cm.total else 0.0,
        "precision": precision,
        "recall": recall,
        "f1": f1,
        "roc_auc": roc_auc(s, y),
    }
