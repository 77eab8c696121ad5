"""Attack Success Rate and per-sample confidence drops."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np


class AsrUndefined(ValueError):
    """No correctly classified rows: the ASR denominator is zero."""


@dataclass
class RobustnessMetrics:
    asr: float
    denominator: int
    flip_count: int
    confidence_drops: np.ndarray | None = None

    @property
    def mean_confidence_drop(self) -> float | None:
        if self.confidence_drops is None or self.confidence_drops.size == 0:
            return None
        return float(self.confidence_drops.mean())


def asr(clean_pred, adv_pred, y_true, restrict_class: int | None = None) -> RobustnessMetrics:
    """Fraction of correctly classified rows whose prediction the attack flipped.

    With ``restrict_class`` set, only correctly classified rows of that class
    count (the attacker's-eye view); by default any correctly classified row
    does. Raises AsrUndefined when the denominator is zero.
    """
    clean_pred = np.asarray(clean_pred)
    adv_pred = np.asarray(adv_pred)
    y_true = np.asarray(y_true)
    if not clean_pred.shape == adv_pred.shape == y_true.shape:
        raise ValueError("prediction and label vectors must align")

    eligible = clean_pred == y_true
    if restrict_class is not None:
        eligible &= y_true == restrict_class
    denominator = int(eligible.sum())
    if denominator == 0:
        raise AsrUndefined("no correctly classified rows to attack")
    flips = int((eligible & (adv_pred != y_true)).sum())
    return RobustnessMetrics(asr=flips / denominator, denominator=denominator, flip_count=flips)


def confidence_drop(p_before, p_after, y_true, clean_pred, restrict_class: int | None = None) -> np.ndarray:
    """True-class probability drop, one value per correctly classified row.

    Negative values (confidence gains) are kept as-is; distributions feed box
    plots downstream.
    """
    p_before = np.asarray(p_before)
    p_after = np.asarray(p_after)
    y_true = np.asarray(y_true)
    clean_pred = np.asarray(clean_pred)
    eligible = clean_pred == y_true
    if restrict_class is not None:
        eligible &= y_true == restrict_class
    if not eligible.any():
        raise AsrUndefined("no correctly classified rows")
    rows = np.flatnonzero(eligible)
    return p_before[rows, y_true[rows]] - p_after[rows, y_true[rows]]


def robustness_metrics(
    outcome, y_true, restrict_class: int | None = None
) -> RobustnessMetrics:
    """Full robustness record for an attack outcome (ASR plus drops)."""
    y = np.asarray(y_true.ids if hasattr(y_true, "ids") else y_true)
    base = asr(outcome.clean_pred, outcome.adv_pred, y, restrict_class=restrict_class)
    drops = confidence_drop(
        outcome.probs_before, outcome.probs_after, y, outcome.clean_pred, restrict_class
    )
    return RobustnessMetrics(
        asr=base.asr,
        denominator=base.denominator,
        flip_count=base.flip_count,
        confidence_drops=drops,
    )
