"""Binary alarm metrics over merged labels.

Three-class exam outcomes collapse to a binary alarm task: labels 0 and 1
count as not-alarm, label 2 as alarm. Balanced accuracy and F1 operate on
the resulting confusion counts.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass

NOT_ALARM = 0
ALARM = 1


def merge_to_alarm(label: int) -> int:
    """Collapse a 3-class label to the binary alarm flag."""
    if label in (0, 1):
        return NOT_ALARM
    if label == 2:
        return ALARM
    raise ValueError(f"label must be 0, 1 or 2, got {label}")


@dataclass(frozen=True)
class ConfusionCounts:
    """Binary confusion counts with alarm as the positive class."""

    tp: int
    fp: int
    tn: int
    fn: int

    def __post_init__(self):
        for name in ("tp", "fp", "tn", "fn"):
            if getattr(self, name) < 0:
                raise ValueError(f"{name} must be nonnegative")

    @property
    def total(self) -> int:
        return self.tp + self.fp + self.tn + self.fn


def counts_from_flags(actual, predicted) -> ConfusionCounts:
    """Tally binary alarm flags (1 = alarm) into confusion counts."""
    if len(actual) != len(predicted):
        raise ValueError("actual and predicted must have equal length")
    tp = fp = tn = fn = 0
    for a, p in zip(actual, predicted):
        if a == ALARM:
            if p == ALARM:
                tp += 1
            else:
                fn += 1
        else:
            if p == ALARM:
                fp += 1
            else:
                tn += 1
    return ConfusionCounts(tp=tp, fp=fp, tn=tn, fn=fn)


def counts_from_labels(actual_labels, predicted_labels) -> ConfusionCounts:
    """Merge 3-class labels to alarm flags, then tally."""
    actual = [merge_to_alarm(a) for a in actual_labels]
    predicted = [merge_to_alarm(p) for p in predicted_labels]
    return counts_from_flags(actual, predicted)


def _warn_degenerate(what: str) -> None:
    warnings.warn(f"degenerate evaluation: {what}", RuntimeWarning, stacklevel=3)


def balanced_accuracy(c: ConfusionCounts) -> float:
    """Unweighted mean of sensitivity and specificity. A class absent from
    the ground truth contributes 0 to its side and triggers a warning."""
    if c.tp + c.fn > 0:
        sensitivity = c.tp / (c.tp + c.fn)
    else:
        _warn_degenerate("no positive examples, sensitivity undefined")
        sensitivity = 0.0
    if c.tn + c.fp > 0:
        specificity = c.tn / (c.tn + c.fp)
    else:
        _warn_degenerate("no negative examples, specificity undefined")
        specificity = 0.0
    return 0.5 * (sensitivity + specificity)


def f1(c: ConfusionCounts, positive_class: int = ALARM) -> float:
    """Harmonic mean of precision and recall for the chosen positive class;
    0 with a warning when undefined."""
    if positive_class == ALARM:
        tp, fp, fn = c.tp, c.fp, c.fn
    elif positive_class == NOT_ALARM:
        tp, fp, fn = c.tn, c.fn, c.fp
    else:
        raise ValueError("positive_class must be ALARM or NOT_ALARM")
    if tp + fp == 0 or tp + fn == 0:
        _warn_degenerate("precision or recall undefined")
        return 0.0
    precision = tp / (tp + fp)
    recall = tp / (tp + fn)
    if precision + recall == 0.0:
        _warn_degenerate("precision and recall both zero")
        return 0.0
    return 2.0 * precision * recall / (precision + recall)
