"""Confusion matrices and the five-metric report.

Per-class metrics are one-vs-rest readouts of an 8x8 count matrix whose
entry (i, j) counts samples of true class i predicted as class j. A zero
denominator yields None (serialized as JSON null), never a silent 0, so
degenerate classes cannot masquerade as failing ones.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass
from pathlib import Path
from typing import Sequence

import numpy as np

from .errors import ContractError
from .labels import CLASS_NAMES, NUM_CLASSES, ClassLabel


@dataclass(frozen=True)
class ConfusionMatrix:
    counts: np.ndarray  # (8, 8) int64, rows = truth, columns = prediction

    def __post_init__(self):
        counts = np.asarray(self.counts, dtype=np.int64)
        if counts.shape != (NUM_CLASSES, NUM_CLASSES):
            raise ContractError(f"confusion matrix must be {NUM_CLASSES}x{NUM_CLASSES}")
        if np.any(counts < 0):
            raise ContractError("confusion matrix counts must be non-negative")
        object.__setattr__(self, "counts", counts)

    @property
    def total(self) -> int:
        return int(self.counts.sum())

    def class_counts(self, label: ClassLabel) -> tuple[int, int, int, int]:
        """One-vs-rest (TP, FP, FN, TN) for the given class."""
        i = label.value
        tp = int(self.counts[i, i])
        fn = int(self.counts[i, :].sum()) - tp
        fp = int(self.counts[:, i].sum()) - tp
        tn = self.total - tp - fn - fp
        return tp, fp, fn, tn


def confusion_matrix(
    predictions: Sequence[ClassLabel], truths: Sequence[ClassLabel]
) -> ConfusionMatrix:
    if len(predictions) != len(truths):
        raise ContractError(
            f"length mismatch: {len(predictions)} predictions vs {len(truths)} truths"
        )
    if len(predictions) == 0:
        raise ContractError("cannot build a confusion matrix from zero samples")
    counts = np.zeros((NUM_CLASSES, NUM_CLASSES), dtype=np.int64)
    for pred, truth in zip(predictions, truths):
        counts[ClassLabel(truth).value, ClassLabel(pred).value] += 1
    return ConfusionMatrix(counts)


def _ratio(numerator: int, denominator: int) -> float | None:
    return None if denominator == 0 else numerator / denominator


@dataclass(frozen=True)
class ClassMetrics:
    precision: float | None
    recall: float | None
    specificity: float | None
    f1: float | None


@dataclass(frozen=True)
class MetricsReport:
    accuracy: float
    per_class: dict[ClassLabel, ClassMetrics]
    confusion: ConfusionMatrix


def f1_score(precision: float | None, recall: float | None) -> float | None:
    if precision is None or recall is None or precision + recall == 0:
        return None
    return 2.0 * precision * recall / (precision + recall)


def metrics_report(cm: ConfusionMatrix) -> MetricsReport:
    """Accuracy (trace over total) plus per-class precision, recall,
    specificity, and F1 read off the matrix."""
    if cm.total == 0:
        raise ContractError("metrics require at least one evaluated sample")
    per_class: dict[ClassLabel, ClassMetrics] = {}
    for label in ClassLabel:
        tp, fp, fn, tn = cm.class_counts(label)
        precision = _ratio(tp, tp + fp)
        recall = _ratio(tp, tp + fn)
        specificity = _ratio(tn, tn + fp)
        per_class[label] = ClassMetrics(precision, recall, specificity, f1_score(precision, recall))
    accuracy = float(np.trace(cm.counts)) / cm.total
    return MetricsReport(accuracy=accuracy, per_class=per_class, confusion=cm)


def report_to_dict(report: MetricsReport) -> dict:
    """The JSON wire layout: accuracy, per_class map, and the raw matrix."""
    return {
        "accuracy": report.accuracy,
        "per_class": {
            label.name: {
                "precision": m.precision,
                "recall": m.recall,
                "specificity": m.specificity,
                "f1": m.f1,
            }
            for label, m in report.per_class.items()
        },
        "confusion_matrix": report.confusion.counts.tolist(),
    }


def write_report_csv(report: MetricsReport, path: str | Path) -> Path:
    """Per-class table: one row per class, one column per metric."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fmt = lambda v: "" if v is None else f"{v:.6f}"
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["class", "precision", "recall", "specificity", "f1"])
        for label in ClassLabel:
            m = report.per_class[label]
            writer.writerow([label.name, fmt(m.precision), fmt(m.recall),
                             fmt(m.specificity), fmt(m.f1)])
        writer.writerow(["overall_accuracy", f"{report.accuracy:.6f}", "", "", ""])
    return path


@dataclass(frozen=True)
class ThresholdReport:
    threshold: float
    coverage: float
    accuracy_at_or_above: float | None
    accuracy_below: float | None

    def to_dict(self) -> dict:
        return {
            "threshold": self.threshold,
            "coverage": self.coverage,
            "accuracy_at_or_above": self.accuracy_at_or_above,
            "accuracy_below": self.accuracy_below,
        }


def threshold_report(
    top_probabilities: Sequence[float],
    correct_flags: Sequence[bool],
    threshold: float,
) -> ThresholdReport:
    """Coverage and conditional accuracy on either side of the triage cut."""
    probs = np.asarray(top_probabilities, dtype=np.float64)
    flags = np.asarray(correct_flags, dtype=bool)
    if probs.shape != flags.shape:
        raise ContractError(
            f"length mismatch: {probs.shape[0]} probabilities vs {flags.shape[0]} flags"
        )
    if probs.size == 0:
        raise ContractError("threshold report requires at least one sample")
    if np.any(probs < 0) or np.any(probs > 1):
        raise ContractError("probabilities must lie in [0, 1]")

    above = probs >= threshold
    coverage = float(above.mean())
    acc_above = float(flags[above].mean()) if above.any() else None
    below = ~above
    acc_below = float(flags[below].mean()) if below.any() else None
    return ThresholdReport(threshold, coverage, acc_above, acc_below)
