"""Class-activation heatmaps and the colorized overlay.

The map is the rectified, gradient-weighted sum of the encoder's last
spatial feature block: channel weights are the spatial means of the
target-class score's gradients. The result is upsampled bilinearly to
the preprocessed input size and divided by its maximum, so a map is
either identically zero or peaks at exactly 1.
"""

from __future__ import annotations

import csv
from pathlib import Path

import cv2
import numpy as np
import torch

from .classifier import ClassifierModel, to_batch_tensor
from .errors import ContractError, UnsupportedArchitecture
from .images import validate_image
from .labels import ClassLabel


def gradcam_heatmap(
    model: ClassifierModel, image: np.ndarray, target_class: ClassLabel
) -> np.ndarray:
    """(size, size) relevance map in [0, 1] for the target class."""
    encoder = model.encoder
    if not hasattr(encoder, "spatial_features") or not hasattr(encoder, "pool"):
        raise UnsupportedArchitecture(
            f"encoder {type(encoder).__name__} exposes no spatial feature layer"
        )
    target = ClassLabel(target_class)
    size = model.input_size

    model.eval()
    batch = to_batch_tensor([validate_image(image)], size)
    batch.requires_grad_(True)  # keeps the graph alive for parameter-free probes
    with torch.enable_grad():
        features = encoder.spatial_features(batch)
        if features.ndim != 4:
            raise UnsupportedArchitecture(
                f"spatial features must be (B, C, H, W), got shape {tuple(features.shape)}"
            )
        features.retain_grad()
        scores = model.head(encoder.pool(features))
        model.zero_grad(set_to_none=True)
        scores[0, target.value].backward()

    grads = features.grad[0]  # (C, h, w)
    weights = grads.mean(dim=(1, 2))  # spatially averaged gradient per channel
    cam = torch.relu((weights[:, None, None] * features[0].detach()).sum(dim=0))
    cam_np = cam.numpy().astype(np.float32)

    upsampled = cv2.resize(cam_np, (size, size), interpolation=cv2.INTER_LINEAR)
    upsampled = np.maximum(upsampled, 0.0)
    peak = float(upsampled.max())
    if peak <= 0.0:
        return np.zeros((size, size), dtype=np.float32)
    return (upsampled / peak).astype(np.float32)


# Relevance colormap anchors: cold to hot.
_COLD = np.array([0.0, 0.0, 1.0], dtype=np.float32)  # blue, low relevance
_WARM = np.array([1.0, 1.0, 0.0], dtype=np.float32)  # yellow, medium relevance
_HOT = np.array([1.0, 0.0, 0.0], dtype=np.float32)  # red, high relevance


def relevance_colormap(heatmap: np.ndarray) -> np.ndarray:
    """Piecewise-linear blue -> yellow -> red mapping of a [0,1] grid."""
    h = np.asarray(heatmap, dtype=np.float32)
    t = np.clip(h, 0.0, 1.0)[..., None]
    low = _COLD + (t / 0.5) * (_WARM - _COLD)
    high = _WARM + ((t - 0.5) / 0.5) * (_HOT - _WARM)
    return np.where(t < 0.5, low, high).astype(np.float32)


def colorize_overlay(heatmap: np.ndarray, image: np.ndarray, alpha: float) -> np.ndarray:
    """Blend the relevance colormap over the image with opacity alpha."""
    image = validate_image(image)
    heatmap = np.asarray(heatmap, dtype=np.float32)
    if not (0.0 <= alpha <= 1.0):
        raise ContractError(f"alpha must lie in [0, 1], got {alpha}")
    if heatmap.shape != image.shape[:2]:
        raise ContractError(
            f"heatmap shape {heatmap.shape} does not match image {image.shape[:2]}"
        )
    blended = (1.0 - alpha) * image + alpha * relevance_colormap(heatmap)
    return np.clip(blended, 0.0, 1.0).astype(np.float32)


def write_heatmap_csv(heatmap: np.ndarray, path: str | Path) -> Path:
    """Portable float grid export, one row per image row."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        for row in np.asarray(heatmap, dtype=np.float64):
            writer.writerow([f"{v:.8f}" for v in row])
    return path
