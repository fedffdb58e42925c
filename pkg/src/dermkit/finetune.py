"""Supervised training of the eight-class head (and the encoder under it).

Loss is cross-entropy and the optimizer is SGD with momentum, full stop;
everything else (schedule, batch size, seed) is configurable. All weights
train, not just the head: a contrastively pretrained encoder is a warm
start, not a frozen feature bank.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np
import torch
from torch import nn

from .classifier import ClassifierModel, to_batch_tensor
from .errors import ContractError, TrainingDiverged
from .images import read_image
from .manifest import DatasetManifest


@dataclass
class TrainConfig:
    epochs: int = 30
    batch_size: int = 32
    learning_rate: float = 0.01
    momentum: float = 0.9
    seed: int = 0
    cache_images: bool = True

    def __post_init__(self):
        if self.epochs < 1:
            raise ContractError("at least 1 training epoch is required")
        if self.batch_size < 1:
            raise ContractError("batch_size must be positive")
        if self.learning_rate <= 0:
            raise ContractError("learning_rate must be positive")


@dataclass
class TrainingRecord:
    train_loss: list[float]
    test_accuracy: list[float]
    best_epoch: int
    best_accuracy: float
    checkpoint_path: Path | None

    def curves(self) -> dict[str, list[float]]:
        return {"train_loss": self.train_loss, "test_accuracy": self.test_accuracy}


class _LabeledStore:
    def __init__(self, manifest: DatasetManifest, cache: bool):
        if not manifest.labeled or len(manifest) == 0:
            raise ContractError("a non-empty, fully labeled manifest is required")
        self.manifest = manifest
        self.labels = np.array([rec.label.value for rec in manifest], dtype=np.int64)
        self.cache_enabled = cache
        self._cache: dict[int, np.ndarray] = {}

    def __len__(self) -> int:
        return len(self.manifest)

    def image(self, index: int) -> np.ndarray:
        if index in self._cache:
            return self._cache[index]
        img = read_image(self.manifest.resolve(self.manifest.records[index]))
        if self.cache_enabled:
            self._cache[index] = img
        return img

    def batch(self, indices: np.ndarray, size: int) -> tuple[torch.Tensor, torch.Tensor]:
        images = [self.image(int(i)) for i in indices]
        return to_batch_tensor(images, size), torch.from_numpy(self.labels[indices])


def _check_disjoint(train_set: DatasetManifest, test_set: DatasetManifest) -> None:
    train_paths = {str(train_set.resolve(rec)) for rec in train_set}
    overlap = [rec.path for rec in test_set if str(test_set.resolve(rec)) in train_paths]
    if overlap:
        raise ContractError(f"train and test sets overlap, e.g. {overlap[0]!r}")


def evaluate_accuracy(model: ClassifierModel, store: _LabeledStore, batch_size: int = 64) -> float:
    model.eval()
    correct = 0
    with torch.no_grad():
        for start in range(0, len(store), batch_size):
            indices = np.arange(start, min(start + batch_size, len(store)))
            batch, labels = store.batch(indices, model.input_size)
            predicted = model(batch).argmax(dim=1)
            correct += int((predicted == labels).sum().item())
    return correct / len(store)


def finetune(
    model: ClassifierModel,
    train_set: DatasetManifest,
    test_set: DatasetManifest,
    config: TrainConfig,
    checkpoint_path: str | Path | None = None,
) -> TrainingRecord:
    """Train for config.epochs, measuring test accuracy after each epoch.

    The best-accuracy weights (earliest epoch on ties) are kept: written
    to checkpoint_path when given, and restored into the model at return
    either way.
    """
    _check_disjoint(train_set, test_set)
    train_store = _LabeledStore(train_set, config.cache_images)
    test_store = _LabeledStore(test_set, config.cache_images)

    torch.manual_seed(config.seed & 0xFFFFFFFF)
    optimizer = torch.optim.SGD(
        model.parameters(), lr=config.learning_rate, momentum=config.momentum
    )
    loss_fn = nn.CrossEntropyLoss()

    train_losses: list[float] = []
    test_accuracies: list[float] = []
    best_epoch = -1
    best_accuracy = -1.0
    best_state: dict | None = None

    for epoch in range(config.epochs):
        order = np.random.default_rng(
            np.random.SeedSequence([config.seed & 0xFFFFFFFFFFFFFFFF, epoch])
        ).permutation(len(train_store))

        model.train()
        epoch_losses: list[float] = []
        for start in range(0, len(order), config.batch_size):
            indices = order[start : start + config.batch_size]
            batch, labels = train_store.batch(indices, model.input_size)
            optimizer.zero_grad()
            loss = loss_fn(model(batch), labels)
            if not torch.isfinite(loss):
                raise TrainingDiverged("cross-entropy loss is not finite", epoch=epoch)
            loss.backward()
            optimizer.step()
            epoch_losses.append(float(loss.item()))

        mean_loss = float(np.mean(epoch_losses))
        if not math.isfinite(mean_loss):
            raise TrainingDiverged("cross-entropy loss is not finite", epoch=epoch)
        train_losses.append(mean_loss)

        accuracy = evaluate_accuracy(model, test_store)
        test_accuracies.append(accuracy)
        if accuracy > best_accuracy:
            best_accuracy = accuracy
            best_epoch = epoch
            best_state = {k: v.detach().clone() for k, v in model.state_dict().items()}

    if best_state is not None:
        model.load_state_dict(best_state)
    model.eval()

    saved_path: Path | None = None
    if checkpoint_path is not None:
        from .checkpoints import save_classifier_checkpoint

        saved_path = save_classifier_checkpoint(
            checkpoint_path,
            model,
            config_echo={
                "epochs": config.epochs,
                "batch_size": config.batch_size,
                "learning_rate": config.learning_rate,
                "momentum": config.momentum,
                "seed": config.seed,
                "loss": "cross-entropy",
                "optimizer": "sgd",
            },
            curves={"train_loss": train_losses, "test_accuracy": test_accuracies},
            extra={"best_epoch": best_epoch, "best_accuracy": best_accuracy},
        )

    return TrainingRecord(
        train_loss=train_losses,
        test_accuracy=test_accuracies,
        best_epoch=best_epoch,
        best_accuracy=best_accuracy,
        checkpoint_path=saved_path,
    )


def write_curves_csv(record: TrainingRecord, path: str | Path) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["epoch", "train_loss", "test_accuracy"])
        for epoch, (loss, acc) in enumerate(zip(record.train_loss, record.test_accuracy)):
            writer.writerow([epoch, f"{loss:.6f}", f"{acc:.6f}"])
    return path
