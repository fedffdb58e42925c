"""Policy application and the two-view generator for contrastive training.

Randomness is fully determined by (seed, draw): each op is independently
included with the policy's per-op probability, the included ops are
shuffled when shuffle_order is set, and parameter values are drawn from
the same generator. ``draw`` distinguishes multiple augmentations of one
source image.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import cv2
import numpy as np

from ..errors import ContractError
from ..images import validate_image
from .config import DEFAULT_PARAMS, AugmentParams
from .ops import (
    AFFINE,
    COLOR_JITTER,
    CROP_AND_RESIZE,
    CUTOUT,
    FLIP_HORIZONTAL,
    FLIP_VERTICAL,
    GAMMA_CONTRAST,
    GAUSSIAN_BLUR,
    GAUSSIAN_NOISE,
    AugmentationOp,
    color_jitter,
    random_crop,
)

_MASK64 = 0xFFFFFFFFFFFFFFFF

FULL_OP_ORDER = (
    GAUSSIAN_NOISE,
    CROP_AND_RESIZE,
    AFFINE,
    CUTOUT,
    FLIP_HORIZONTAL,
    FLIP_VERTICAL,
    GAMMA_CONTRAST,
    GAUSSIAN_BLUR,
)


@dataclass(frozen=True)
class AugmentationPolicy:
    ops: tuple[AugmentationOp, ...]
    per_op_probability: float = 0.5
    shuffle_order: bool = True
    seed: int = 0

    def __post_init__(self):
        object.__setattr__(self, "ops", tuple(self.ops))
        if not (0.0 <= self.per_op_probability <= 1.0):
            raise ContractError(
                f"per_op_probability must lie in [0, 1], got {self.per_op_probability}"
            )


def full_policy(
    seed: int,
    params: AugmentParams = DEFAULT_PARAMS,
    per_op_probability: float = 0.5,
    shuffle_order: bool = True,
) -> AugmentationPolicy:
    """The eight-op expansion pipeline (noise, crop, affine, cutout, flips,
    gamma, blur) with randomized inclusion and order."""
    ops = tuple(AugmentationOp(kind, params) for kind in FULL_OP_ORDER)
    return AugmentationPolicy(
        ops, per_op_probability=per_op_probability, shuffle_order=shuffle_order, seed=seed
    )


def _draw_rng(*entropy: int) -> np.random.Generator:
    return np.random.default_rng(np.random.SeedSequence([e & _MASK64 for e in entropy]))


def apply_policy(image: np.ndarray, policy: AugmentationPolicy, draw: int) -> np.ndarray:
    """Run one randomized pass of the policy over the image.

    Output has the image's dimensions and stays in [0, 1]; a fixed
    (policy, draw, image) triple is bit-reproducible.
    """
    image = validate_image(image).astype(np.float32, copy=True)
    rng = _draw_rng(policy.seed, draw)
    if not policy.ops:
        return image

    included = [op for op in policy.ops if rng.random() < policy.per_op_probability]
    if policy.shuffle_order and len(included) > 1:
        order = rng.permutation(len(included))
        included = [included[i] for i in order]
    for op in included:
        image = op.apply(image, rng)
    return np.ascontiguousarray(image, dtype=np.float32)


def simclr_view_pair(
    image: np.ndarray,
    seed: int,
    draw: int,
    size: int = 224,
    params: AugmentParams = DEFAULT_PARAMS,
) -> tuple[np.ndarray, np.ndarray]:
    """Two independently augmented views: random crop resized to
    size x size, then color jitter. Deterministic in (seed, draw)."""
    image = validate_image(image).astype(np.float32, copy=False)
    views = []
    for view_index in (0, 1):
        rng = _draw_rng(seed, draw, view_index)
        crop = random_crop(image, rng, params)
        view = cv2.resize(crop, (size, size), interpolation=cv2.INTER_LINEAR)
        view = np.clip(view, 0.0, 1.0)
        view = color_jitter(view, rng, params)
        views.append(np.ascontiguousarray(view, dtype=np.float32))
    return views[0], views[1]
