"""Eight-class classifier: encoder trunk plus a linear scoring head.

The preprocessing contract (bilinear resize to 224x224, RGB in [0,1]) is
applied inside predict, so callers can hand over photographs of any size.
"""

from __future__ import annotations

import numpy as np
import torch
from torch import nn

from .encoders import Encoder
from .errors import ContractError
from .images import INPUT_SIZE, preprocess, validate_image
from .labels import NUM_CLASSES, ClassLabel


class ClassifierModel(nn.Module):
    def __init__(self, encoder: Encoder):
        super().__init__()
        self.encoder = encoder
        self.head = nn.Linear(encoder.feature_dim, NUM_CLASSES)
        self.input_size = INPUT_SIZE

    def forward(self, x: torch.Tensor) -> torch.Tensor:
        """Length-8 score vector per batch row."""
        return self.head(self.encoder(x))


def to_batch_tensor(images: list[np.ndarray] | np.ndarray, size: int = INPUT_SIZE) -> torch.Tensor:
    """Preprocess and stack images into a (B, 3, size, size) float tensor."""
    if isinstance(images, np.ndarray) and images.ndim == 3:
        images = [images]
    arrays = [preprocess(validate_image(img), size) for img in images]
    stacked = np.stack(arrays).astype(np.float32)
    return torch.from_numpy(stacked).permute(0, 3, 1, 2).contiguous()


def predict_scores(model: ClassifierModel, images: list[np.ndarray]) -> np.ndarray:
    model.eval()
    with torch.no_grad():
        scores = model(to_batch_tensor(images, model.input_size))
    return scores.numpy()


def predict_proba(model: ClassifierModel, images: list[np.ndarray]) -> np.ndarray:
    """(B, 8) softmax probabilities; rows sum to 1 within 1e-6."""
    model.eval()
    with torch.no_grad():
        scores = model(to_batch_tensor(images, model.input_size))
        probs = torch.softmax(scores.double(), dim=1)
    return probs.numpy()


def predict(model: ClassifierModel, image: np.ndarray) -> np.ndarray:
    """Probability vector over the 8 classes for one image of any size."""
    return predict_proba(model, [image])[0]


def argmax_label(probabilities: np.ndarray) -> tuple[ClassLabel, float]:
    """Winning class and its probability; ties go to the lowest index."""
    probs = np.asarray(probabilities, dtype=np.float64).ravel()
    if probs.shape[0] != NUM_CLASSES:
        raise ContractError(f"expected a length-{NUM_CLASSES} vector, got {probs.shape[0]}")
    if np.any(probs < 0):
        raise ContractError("probabilities must be non-negative")
    index = int(np.argmax(probs))  # argmax returns the first maximum
    return ClassLabel(index), float(probs[index])
