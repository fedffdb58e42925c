"""The augmentation operator set.

Every op maps a valid [0,1] float RGB image to another one of the same
size; parameter values are drawn from the ranges in AugmentParams using
the caller's RNG, so a fixed generator state reproduces the op exactly.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import cv2
import numpy as np

from ..errors import ContractError
from ..images import validate_image
from .config import DEFAULT_PARAMS, AugmentParams

GAUSSIAN_NOISE = "GaussianNoise"
CROP_AND_RESIZE = "CropAndResize"
AFFINE = "Affine"
CUTOUT = "Cutout"
FLIP_HORIZONTAL = "FlipHorizontal"
FLIP_VERTICAL = "FlipVertical"
GAMMA_CONTRAST = "GammaContrast"
GAUSSIAN_BLUR = "GaussianBlur"
COLOR_JITTER = "ColorJitter"

OP_KINDS = (
    GAUSSIAN_NOISE,
    CROP_AND_RESIZE,
    AFFINE,
    CUTOUT,
    FLIP_HORIZONTAL,
    FLIP_VERTICAL,
    GAMMA_CONTRAST,
    GAUSSIAN_BLUR,
    COLOR_JITTER,
)

_LUMA = np.array([0.299, 0.587, 0.114], dtype=np.float32)


@dataclass(frozen=True)
class AugmentationOp:
    """One operator plus the parameter ranges it draws from."""

    kind: str
    params: AugmentParams = field(default=DEFAULT_PARAMS)

    def __post_init__(self):
        if self.kind not in OP_KINDS:
            raise ContractError(f"unknown augmentation op {self.kind!r}")

    def apply(self, image: np.ndarray, rng: np.random.Generator) -> np.ndarray:
        return _APPLY[self.kind](image, rng, self.params)


def _clip(image: np.ndarray) -> np.ndarray:
    return np.clip(image, 0.0, 1.0, out=image)


def gaussian_noise(image: np.ndarray, rng: np.random.Generator, p: AugmentParams) -> np.ndarray:
    sigma = rng.uniform(p.noise_sigma_min, p.noise_sigma_max)
    out = image + rng.normal(0.0, sigma, image.shape).astype(np.float32)
    return _clip(out)


def random_crop(
    image: np.ndarray, rng: np.random.Generator, p: AugmentParams
) -> np.ndarray:
    """Crop a random window at a random scale; no resize."""
    h, w = image.shape[:2]
    scale = rng.uniform(p.crop_scale_min, p.crop_scale_max)
    ch = max(1, int(round(h * scale)))
    cw = max(1, int(round(w * scale)))
    top = int(rng.integers(0, h - ch + 1))
    left = int(rng.integers(0, w - cw + 1))
    return image[top : top + ch, left : left + cw]


def crop_and_resize(image: np.ndarray, rng: np.random.Generator, p: AugmentParams) -> np.ndarray:
    h, w = image.shape[:2]
    crop = random_crop(image, rng, p)
    out = cv2.resize(crop, (w, h), interpolation=cv2.INTER_LINEAR)
    return _clip(out)


def affine(image: np.ndarray, rng: np.random.Generator, p: AugmentParams) -> np.ndarray:
    h, w = image.shape[:2]
    angle = np.deg2rad(rng.uniform(-p.rotation_deg, p.rotation_deg))
    shear = np.deg2rad(rng.uniform(-p.shear_deg, p.shear_deg))
    tx = rng.uniform(-p.translate_frac, p.translate_frac) * w
    ty = rng.uniform(-p.translate_frac, p.translate_frac) * h

    rot = np.array([[np.cos(angle), -np.sin(angle)], [np.sin(angle), np.cos(angle)]])
    shr = np.array([[1.0, np.tan(shear)], [0.0, 1.0]])
    lin = rot @ shr
    center = np.array([(w - 1) / 2.0, (h - 1) / 2.0])
    offset = center - lin @ center + np.array([tx, ty])
    matrix = np.hstack([lin, offset[:, None]]).astype(np.float64)

    out = cv2.warpAffine(
        image,
        matrix,
        (w, h),
        flags=cv2.INTER_LINEAR,
        borderMode=cv2.BORDER_REFLECT_101,
    )
    return _clip(out)


def cutout(image: np.ndarray, rng: np.random.Generator, p: AugmentParams) -> np.ndarray:
    h, w = image.shape[:2]
    frac = rng.uniform(p.cutout_frac_min, p.cutout_frac_max)
    side = max(1, int(round(frac * min(h, w))))
    side = min(side, h, w)
    top = int(rng.integers(0, h - side + 1))
    left = int(rng.integers(0, w - side + 1))
    out = image.copy()
    out[top : top + side, left : left + side] = image.mean(axis=(0, 1))
    return _clip(out)


def flip_horizontal(image: np.ndarray, rng: np.random.Generator, p: AugmentParams) -> np.ndarray:
    return np.ascontiguousarray(image[:, ::-1])


def flip_vertical(image: np.ndarray, rng: np.random.Generator, p: AugmentParams) -> np.ndarray:
    return np.ascontiguousarray(image[::-1])


def gamma_contrast(image: np.ndarray, rng: np.random.Generator, p: AugmentParams) -> np.ndarray:
    gamma = rng.uniform(p.gamma_min, p.gamma_max)
    return _clip(np.power(image, np.float32(gamma)))


def gaussian_blur(image: np.ndarray, rng: np.random.Generator, p: AugmentParams) -> np.ndarray:
    sigma = rng.uniform(p.blur_sigma_min, p.blur_sigma_max)
    out = cv2.GaussianBlur(image, (0, 0), sigmaX=sigma, sigmaY=sigma)
    return _clip(out)


def color_jitter(image: np.ndarray, rng: np.random.Generator, p: AugmentParams) -> np.ndarray:
    """Brightness, contrast, saturation, then hue, with independent draws."""
    brightness = rng.uniform(p.jitter_factor_min, p.jitter_factor_max)
    contrast = rng.uniform(p.jitter_factor_min, p.jitter_factor_max)
    saturation = rng.uniform(p.jitter_factor_min, p.jitter_factor_max)
    hue = rng.uniform(-p.hue_shift, p.hue_shift)

    out = _clip(image * np.float32(brightness))
    gray_mean = np.float32((out @ _LUMA).mean())
    out = _clip((out - gray_mean) * np.float32(contrast) + gray_mean)
    gray = (out @ _LUMA)[..., None]
    out = _clip(gray + (out - gray) * np.float32(saturation))
    if hue != 0.0:
        hsv = cv2.cvtColor(out.astype(np.float32), cv2.COLOR_RGB2HSV)
        hsv[..., 0] = (hsv[..., 0] + np.float32(hue * 360.0)) % 360.0
        out = cv2.cvtColor(hsv, cv2.COLOR_HSV2RGB)
    return _clip(np.ascontiguousarray(out, dtype=np.float32))


_APPLY = {
    GAUSSIAN_NOISE: gaussian_noise,
    CROP_AND_RESIZE: crop_and_resize,
    AFFINE: affine,
    CUTOUT: cutout,
    FLIP_HORIZONTAL: flip_horizontal,
    FLIP_VERTICAL: flip_vertical,
    GAMMA_CONTRAST: gamma_contrast,
    GAUSSIAN_BLUR: gaussian_blur,
    COLOR_JITTER: color_jitter,
}


def apply_op(op: AugmentationOp, image: np.ndarray, rng: np.random.Generator) -> np.ndarray:
    image = validate_image(image).astype(np.float32, copy=False)
    return op.apply(image, rng)
