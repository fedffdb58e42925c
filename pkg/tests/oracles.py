"""Independent reference implementations used to cross-check the library.

Everything here is deliberately written the slow, literal way (scalar
double loops, explicit counting passes) and must stay independent of the
code paths it validates.
"""

from __future__ import annotations

import math

import numpy as np


def ntxent_reference(batch: np.ndarray, temperature: float) -> float:
    """Literal double-loop contrastive loss.

    s(i, j) = zi . zj / (t |zi| |zj|)
    l(i, j) = -log( exp(s(i, j)) / sum_{k != i} exp(s(i, k)) )
    loss    = (1 / 2N) * sum_{k=1..N} [ l(2k-1, 2k) + l(2k, 2k-1) ]   (1-based)
    """
    z = np.asarray(batch, dtype=np.float64)
    two_n = z.shape[0]

    def s(i: int, j: int) -> float:
        ni = math.sqrt(float(z[i] @ z[i]))
        nj = math.sqrt(float(z[j] @ z[j]))
        return float(z[i] @ z[j]) / (temperature * ni * nj)

    def l(i: int, j: int) -> float:
        denominator = 0.0
        for k in range(two_n):
            if k != i:
                denominator += math.exp(s(i, k))
        return -math.log(math.exp(s(i, j)) / denominator)

    total = 0.0
    for pair in range(two_n // 2):
        a, b = 2 * pair, 2 * pair + 1
        total += l(a, b) + l(b, a)
    return total / two_n


def per_class_metrics_reference(counts: np.ndarray) -> tuple[float, dict[int, dict]]:
    """Direct one-vs-rest formulas per class, plus trace-over-total accuracy."""
    counts = np.asarray(counts, dtype=np.int64)
    total = int(counts.sum())
    per_class: dict[int, dict] = {}
    for c in range(counts.shape[0]):
        tp = int(counts[c, c])
        fn = int(counts[c, :].sum()) - tp
        fp = int(counts[:, c].sum()) - tp
        tn = total - tp - fn - fp
        precision = tp / (tp + fp) if tp + fp > 0 else None
        recall = tp / (tp + fn) if tp + fn > 0 else None
        specificity = tn / (tn + fp) if tn + fp > 0 else None
        if precision is None or recall is None or precision + recall == 0:
            f1 = None
        else:
            f1 = 2 * precision * recall / (precision + recall)
        per_class[c] = {
            "precision": precision,
            "recall": recall,
            "specificity": specificity,
            "f1": f1,
        }
    accuracy = float(np.trace(counts)) / total
    return accuracy, per_class


def confusion_counts_reference(predictions, truths, num_classes: int = 8) -> np.ndarray:
    """Independent counting pass over (truth, prediction) pairs."""
    counts = np.zeros((num_classes, num_classes), dtype=np.int64)
    for pred, truth in zip(predictions, truths):
        counts[int(truth)][int(pred)] += 1
    return counts


def threshold_reference(probabilities, flags, threshold: float) -> dict:
    """Explicit counting on either side of the cut."""
    above_total = above_correct = below_total = below_correct = 0
    for p, ok in zip(probabilities, flags):
        if p >= threshold:
            above_total += 1
            above_correct += 1 if ok else 0
        else:
            below_total += 1
            below_correct += 1 if ok else 0
    n = above_total + below_total
    return {
        "coverage": above_total / n,
        "accuracy_at_or_above": above_correct / above_total if above_total else None,
        "accuracy_below": below_correct / below_total if below_total else None,
    }
