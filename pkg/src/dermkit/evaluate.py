"""Manifest-level evaluation: predictions, reports, and subset recall."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import torch

from .classifier import ClassifierModel, to_batch_tensor
from .errors import ContractError
from .images import read_image
from .labels import GRADES, STAGES, ClassLabel
from .manifest import DatasetManifest
from .metrics import ConfusionMatrix, MetricsReport, confusion_matrix, metrics_report


def predict_manifest(
    model: ClassifierModel, manifest: DatasetManifest, batch_size: int = 64
) -> np.ndarray:
    """(N, 8) probability rows, in manifest order."""
    if len(manifest) == 0:
        raise ContractError("cannot evaluate an empty manifest")
    model.eval()
    chunks: list[np.ndarray] = []
    with torch.no_grad():
        for start in range(0, len(manifest), batch_size):
            records = manifest.records[start : start + batch_size]
            images = [read_image(manifest.resolve(rec)) for rec in records]
            scores = model(to_batch_tensor(images, model.input_size))
            chunks.append(torch.softmax(scores.double(), dim=1).numpy())
    return np.concatenate(chunks, axis=0)


@dataclass(frozen=True)
class EvaluationResult:
    probabilities: np.ndarray  # (N, 8)
    predictions: tuple[ClassLabel, ...]
    truths: tuple[ClassLabel, ...]
    confusion: ConfusionMatrix
    report: MetricsReport

    @property
    def top_probabilities(self) -> np.ndarray:
        return self.probabilities.max(axis=1)

    @property
    def correct_flags(self) -> np.ndarray:
        return np.array(
            [p is t for p, t in zip(self.predictions, self.truths)], dtype=bool
        )


def evaluate_manifest(
    model: ClassifierModel, manifest: DatasetManifest, batch_size: int = 64
) -> EvaluationResult:
    if not manifest.labeled:
        raise ContractError("evaluation requires a fully labeled manifest")
    probabilities = predict_manifest(model, manifest, batch_size)
    predictions = tuple(ClassLabel(int(i)) for i in probabilities.argmax(axis=1))
    truths = tuple(rec.label for rec in manifest)
    cm = confusion_matrix(predictions, truths)
    return EvaluationResult(probabilities, predictions, truths, cm, metrics_report(cm))


@dataclass(frozen=True)
class SubsetReport:
    partition: str
    count: int
    recall: float

    def to_dict(self) -> dict:
        return {"partition": self.partition, "count": self.count, "recall": self.recall}


def subset_assessment(
    model: ClassifierModel, manifest: DatasetManifest, partition_key: str
) -> list[SubsetReport]:
    """Mpox recall within each grade (or stage) subset of the tagged records.

    A subset sample counts as correct iff the full eight-way predictor
    calls it Mpox; subsets are disjoint and cover all tagged records.
    """
    if partition_key not in ("grade", "stage"):
        raise ContractError(f"partition_key must be 'grade' or 'stage', got {partition_key!r}")
    tagged = [
        rec
        for rec in manifest
        if rec.label is ClassLabel.Mpox and getattr(rec, partition_key) is not None
    ]
    if not tagged:
        raise ContractError(f"manifest has no Mpox records tagged with a {partition_key}")

    subset = DatasetManifest(tuple(tagged), name=f"{manifest.name}-{partition_key}",
                             base_dir=manifest.base_dir)
    probabilities = predict_manifest(model, subset)
    predicted_mpox = probabilities.argmax(axis=1) == ClassLabel.Mpox.value

    order = GRADES if partition_key == "grade" else STAGES
    reports = []
    for value in order:
        hits = np.array([getattr(rec, partition_key) == value for rec in tagged], dtype=bool)
        if not hits.any():
            continue
        reports.append(
            SubsetReport(
                partition=value,
                count=int(hits.sum()),
                recall=float(predicted_mpox[hits].mean()),
            )
        )
    return reports
