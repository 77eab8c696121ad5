"""Clean classification metrics over predicted and true label vectors."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

AVERAGING_MODES = ("binary", "macro")


@dataclass
class CleanMetrics:
    accuracy: float
    precision: float
    recall: float
    f1: float
    confusion: np.ndarray  # confusion[true, pred]
    mode: str

    def as_dict(self) -> dict:
        return {
            "accuracy": self.accuracy,
            "precision": self.precision,
            "recall": self.recall,
            "f1": self.f1,
            "mode": self.mode,
        }


def _f1(precision: float, recall: float) -> float:
    return 2 * precision * recall / (precision + recall) if precision + recall > 0 else 0.0


def clean_metrics(y_true, y_pred, mode: str = "binary", positive: int = 1) -> CleanMetrics:
    """Accuracy, precision, recall, F1 plus the confusion counts.

    Binary mode scores the attack class (``positive``) against everything
    else; macro mode averages per-class precision and recall unweighted, with
    F1 taken from the averaged precision/recall.
    """
    if mode not in AVERAGING_MODES:
        raise ValueError(f"mode must be one of {AVERAGING_MODES}")
    y_true = np.asarray(y_true, dtype=np.int64)
    y_pred = np.asarray(y_pred, dtype=np.int64)
    if y_true.size == 0:
        raise ValueError("empty input")
    if y_true.shape != y_pred.shape:
        raise ValueError("y_true and y_pred must be the same length")

    k = int(max(y_true.max(), y_pred.max())) + 1
    confusion = np.zeros((k, k), dtype=np.int64)
    np.add.at(confusion, (y_true, y_pred), 1)
    accuracy = float(np.trace(confusion) / y_true.size)

    if mode == "binary":
        tp = int(confusion[positive, positive])
        fp = int(confusion[:, positive].sum() - tp)
        fn = int(confusion[positive, :].sum() - tp)
        precision = tp / (tp + fp) if tp + fp > 0 else 0.0
        recall = tp / (tp + fn) if tp + fn > 0 else 0.0
    else:
        per_p, per_r = [], []
        for c in range(k):
            tp = confusion[c, c]
            col = confusion[:, c].sum()
            row = confusion[c, :].sum()
            per_p.append(tp / col if col > 0 else 0.0)
            per_r.append(tp / row if row > 0 else 0.0)
        precision = float(np.mean(per_p))
        recall = float(np.mean(per_r))

    return CleanMetrics(
        accuracy=accuracy,
        precision=float(precision),
        recall=float(recall),
        f1=_f1(precision, recall),
        confusion=confusion,
        mode=mode,
    )
