"""Matplotlib renderings saved next to the delimited report outputs."""

from __future__ import annotations

from pathlib import Path
from typing import Mapping, Sequence

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np

from .labels import CLASS_NAMES, ClassLabel
from .metrics import ConfusionMatrix, MetricsReport


def _save(fig, path: str | Path) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fig.savefig(path, dpi=150, bbox_inches="tight")
    plt.close(fig)
    return path


def save_training_curves(
    train_loss: Sequence[float], test_accuracy: Sequence[float], path: str | Path
) -> Path:
    fig, (ax_loss, ax_acc) = plt.subplots(1, 2, figsize=(10, 4))
    epochs = np.arange(len(train_loss))
    ax_loss.plot(epochs, train_loss, color="tab:red")
    ax_loss.set_xlabel("epoch")
    ax_loss.set_ylabel("train loss")
    ax_loss.grid(alpha=0.3)
    ax_acc.plot(epochs, test_accuracy, color="tab:blue")
    ax_acc.set_xlabel("epoch")
    ax_acc.set_ylabel("test accuracy")
    ax_acc.set_ylim(0, 1.02)
    ax_acc.grid(alpha=0.3)
    fig.suptitle("Fine-tuning curves")
    return _save(fig, path)


def save_loss_curve(losses: Sequence[float], path: str | Path, ylabel: str = "contrastive loss") -> Path:
    fig, ax = plt.subplots(figsize=(6, 4))
    ax.plot(np.arange(len(losses)), losses, color="tab:purple")
    ax.set_xlabel("epoch")
    ax.set_ylabel(ylabel)
    ax.grid(alpha=0.3)
    return _save(fig, path)


def save_confusion_heatmap(cm: ConfusionMatrix, path: str | Path) -> Path:
    counts = cm.counts
    fig, ax = plt.subplots(figsize=(7, 6))
    im = ax.imshow(counts, cmap="Blues")
    ax.set_xticks(range(len(CLASS_NAMES)), CLASS_NAMES, rotation=45, ha="right")
    ax.set_yticks(range(len(CLASS_NAMES)), CLASS_NAMES)
    ax.set_xlabel("predicted")
    ax.set_ylabel("true")
    threshold = counts.max() / 2 if counts.max() else 0.5
    for i in range(counts.shape[0]):
        for j in range(counts.shape[1]):
            ax.text(
                j, i, str(counts[i, j]),
                ha="center", va="center",
                color="white" if counts[i, j] > threshold else "black",
                fontsize=8,
            )
    fig.colorbar(im, ax=ax, shrink=0.8)
    return _save(fig, path)


def save_metric_bars(report: MetricsReport, path: str | Path) -> Path:
    """Grouped per-class bars for the four one-vs-rest metrics."""
    metrics = ("precision", "recall", "specificity", "f1")
    x = np.arange(len(CLASS_NAMES))
    width = 0.2
    fig, ax = plt.subplots(figsize=(11, 4.5))
    for offset, metric in enumerate(metrics):
        values = [
            getattr(report.per_class[label], metric) or 0.0 for label in ClassLabel
        ]
        ax.bar(x + (offset - 1.5) * width, values, width, label=metric)
    ax.set_xticks(x, CLASS_NAMES, rotation=45, ha="right")
    ax.set_ylim(0, 1.05)
    ax.set_ylabel("score")
    ax.legend(ncols=4, loc="lower right")
    ax.set_title(f"Per-class metrics (accuracy {report.accuracy:.4f})")
    ax.grid(axis="y", alpha=0.3)
    return _save(fig, path)


def save_class_distribution(distribution: Mapping[ClassLabel, int], path: str | Path) -> Path:
    fig, ax = plt.subplots(figsize=(8, 4))
    ax.bar(CLASS_NAMES, [distribution[label] for label in ClassLabel], color="tab:green")
    ax.set_ylabel("images")
    ax.set_xticks(range(len(CLASS_NAMES)), CLASS_NAMES, rotation=45, ha="right")
    ax.grid(axis="y", alpha=0.3)
    return _save(fig, path)


def save_probability_boxplot(
    per_class_probs: Mapping[ClassLabel, Sequence[float]], path: str | Path
) -> Path:
    """Distribution of winning probabilities per predicted class."""
    data = [list(per_class_probs.get(label, [])) or [np.nan] for label in ClassLabel]
    fig, ax = plt.subplots(figsize=(8, 4))
    ax.boxplot(data, tick_labels=CLASS_NAMES)
    ax.set_ylabel("top probability")
    ax.set_ylim(0, 1.05)
    ax.tick_params(axis="x", rotation=45)
    ax.grid(axis="y", alpha=0.3)
    return _save(fig, path)
