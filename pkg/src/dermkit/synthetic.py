"""Procedural shape corpus for desk-scale runs.

Real rash corpora cannot be bundled, so smoke tests and the CLI demo run
on a synthetic stand-in: each of the eight classes renders a distinct
glyph (shape + hue) over a noisy gray background. The task is designed to
be cleanly separable by a small CNN within a few epochs.
"""

from __future__ import annotations

import colorsys
from pathlib import Path

import numpy as np

from .labels import ClassLabel
from .manifest import DatasetManifest, ImageRecord, save_manifest

# Hue per class; Normal renders no glyph at all.
_CLASS_HUES = {
    ClassLabel.Bullous: 0.00,
    ClassLabel.Chickenpox: 0.08,
    ClassLabel.Eczema: 0.17,
    ClassLabel.Measles: 0.33,
    ClassLabel.Mpox: 0.50,
    ClassLabel.Urticaria: 0.67,
    ClassLabel.Vasculitis: 0.83,
}


def _background(rng: np.random.Generator, size: int) -> np.ndarray:
    base = rng.uniform(0.35, 0.6)
    img = np.full((size, size, 3), base, dtype=np.float32)
    img += rng.normal(0.0, 0.04, img.shape).astype(np.float32)
    return np.clip(img, 0.0, 1.0)


def _glyph_color(rng: np.random.Generator, hue: float) -> np.ndarray:
    h = (hue + rng.uniform(-0.03, 0.03)) % 1.0
    r, g, b = colorsys.hsv_to_rgb(h, rng.uniform(0.85, 1.0), rng.uniform(0.8, 1.0))
    return np.array([r, g, b], dtype=np.float32)


def _paint(img: np.ndarray, mask: np.ndarray, color: np.ndarray) -> None:
    img[mask] = color


def render_shape_image(label: ClassLabel, rng: np.random.Generator, size: int = 64) -> np.ndarray:
    """Render one sample of the given class as a float RGB image in [0,1]."""
    img = _background(rng, size)
    if label is ClassLabel.Normal:
        return img

    color = _glyph_color(rng, _CLASS_HUES[label])
    yy, xx = np.mgrid[0:size, 0:size].astype(np.float32)
    cy = size * rng.uniform(0.38, 0.62)
    cx = size * rng.uniform(0.38, 0.62)
    radius = size * rng.uniform(0.20, 0.30)

    if label is ClassLabel.Bullous:
        mask = (yy - cy) ** 2 + (xx - cx) ** 2 <= radius**2
    elif label is ClassLabel.Chickenpox:
        mask = np.zeros((size, size), dtype=bool)
        for _ in range(rng.integers(6, 11)):
            dy = size * rng.uniform(0.15, 0.85)
            dx = size * rng.uniform(0.15, 0.85)
            r = size * rng.uniform(0.04, 0.07)
            mask |= (yy - dy) ** 2 + (xx - dx) ** 2 <= r**2
    elif label is ClassLabel.Eczema:
        mask = (np.abs(yy - cy) <= radius) & (np.abs(xx - cx) <= radius)
    elif label is ClassLabel.Measles:
        # upright triangle: inside the band below the apex, narrowing upward
        height = 2.0 * radius
        top = cy - radius
        rel = (yy - top) / height
        mask = (rel >= 0) & (rel <= 1) & (np.abs(xx - cx) <= rel * radius)
    elif label is ClassLabel.Mpox:
        d2 = (yy - cy) ** 2 + (xx - cx) ** 2
        mask = (d2 <= radius**2) & (d2 >= (0.55 * radius) ** 2)
    elif label is ClassLabel.Urticaria:
        period = size * rng.uniform(0.16, 0.22)
        phase = rng.uniform(0, period)
        mask = ((yy + phase) % period) < period * 0.4
    elif label is ClassLabel.Vasculitis:
        arm = radius * 0.45
        mask = ((np.abs(yy - cy) <= arm) & (np.abs(xx - cx) <= radius)) | (
            (np.abs(xx - cx) <= arm) & (np.abs(yy - cy) <= radius)
        )
    else:  # pragma: no cover - exhaustive over ClassLabel
        raise AssertionError(label)

    _paint(img, mask, color)
    return np.clip(img, 0.0, 1.0)


def render_planted_evidence(
    positive: bool, rng: np.random.Generator, size: int = 64
) -> np.ndarray:
    """Binary probe pair for localization checks.

    Positive samples carry a bright red patch strictly inside the top-left
    quadrant; negatives carry a blue patch in the bottom-right. Everything
    else is background, so class evidence lives in a known quadrant.
    """
    img = _background(rng, size)
    half = size // 2
    side = int(size * rng.uniform(0.18, 0.28))
    margin = 2
    lo = margin
    hi = half - side - margin
    oy = int(rng.integers(lo, max(lo + 1, hi)))
    ox = int(rng.integers(lo, max(lo + 1, hi)))
    if positive:
        color = np.array([0.95, 0.1, 0.1], dtype=np.float32)
        y0, x0 = oy, ox
    else:
        color = np.array([0.1, 0.2, 0.95], dtype=np.float32)
        y0, x0 = half + oy, half + ox
    img[y0 : y0 + side, x0 : x0 + side] = color
    return np.clip(img, 0.0, 1.0)


def build_labeled_corpus(
    root: str | Path,
    per_class: int,
    seed: int,
    size: int = 64,
    name: str = "synthetic",
    tag_mpox: bool = False,
) -> DatasetManifest:
    """Write per_class images for each of the 8 classes plus a manifest CSV.

    With ``tag_mpox`` the Mpox records cycle through grade and stage tags
    so subset evaluation has something to group by.
    """
    from .images import write_png  # local import to avoid a cycle at import time
    from .labels import GRADES, STAGES

    root = Path(root)
    rng = np.random.default_rng(np.random.SeedSequence([seed & 0xFFFFFFFFFFFFFFFF, size]))
    records = []
    for label in ClassLabel:
        for i in range(per_class):
            rel = f"{label.name.lower()}/{label.name.lower()}_{i:04d}.png"
            write_png(render_shape_image(label, rng, size), root / rel)
            grade = stage = None
            if tag_mpox and label is ClassLabel.Mpox:
                grade = GRADES[i % len(GRADES)]
                stage = STAGES[i % len(STAGES)]
            records.append(
                ImageRecord(path=rel, label=label, grade=grade, stage=stage, source="synthetic")
            )
    manifest = DatasetManifest(tuple(records), name=name, base_dir=root)
    save_manifest(manifest, root / f"{name}.csv")
    return manifest


def build_unlabeled_corpus(
    root: str | Path, count: int, seed: int, size: int = 64, name: str = "synthetic-unlabeled"
) -> DatasetManifest:
    """Write a shuffled, label-free corpus drawn from all shape classes."""
    from .images import write_png

    root = Path(root)
    rng = np.random.default_rng(np.random.SeedSequence([seed & 0xFFFFFFFFFFFFFFFF, size, count]))
    labels = list(ClassLabel)
    records = []
    for i in range(count):
        label = labels[int(rng.integers(0, len(labels)))]
        rel = f"unlabeled/img_{i:05d}.png"
        write_png(render_shape_image(label, rng, size), root / rel)
        records.append(ImageRecord(path=rel, source="synthetic"))
    manifest = DatasetManifest(tuple(records), name=name, base_dir=root)
    save_manifest(manifest, root / f"{name}.csv")
    return manifest
