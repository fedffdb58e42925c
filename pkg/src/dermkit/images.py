"""Image decode/encode and the network preprocessing contract.

Images travel through the toolkit as float32 arrays of shape (H, W, 3)
with RGB values in [0, 1]. Network input is a bilinear resize straight to
224x224 (no aspect-preserving crop): the capture side puts no constraint
on photographing angle or distance, so nothing is cropped away.
"""

from __future__ import annotations

import io
from pathlib import Path

import cv2
import numpy as np
from PIL import Image, UnidentifiedImageError

from .errors import ContractError, ImageDecodeError

INPUT_SIZE = 224


def validate_image(image: np.ndarray) -> np.ndarray:
    """Check the (H, W, 3) float [0,1] contract; returns the array."""
    image = np.asarray(image)
    if image.ndim != 3 or image.shape[2] != 3:
        raise ContractError(f"expected (H, W, 3) image, got shape {image.shape}")
    if image.shape[0] < 1 or image.shape[1] < 1:
        raise ContractError(f"image has zero area: shape {image.shape}")
    if not np.issubdtype(image.dtype, np.floating):
        raise ContractError(f"expected float image in [0,1], got dtype {image.dtype}")
    if image.size and (image.min() < 0.0 or image.max() > 1.0):
        raise ContractError("image values must lie in [0, 1]")
    return image


def decode_image(data: bytes) -> np.ndarray:
    """Decode PNG/JPEG bytes to a float32 RGB array in [0, 1]."""
    try:
        with Image.open(io.BytesIO(data)) as img:
            rgb = img.convert("RGB")
            array = np.asarray(rgb, dtype=np.uint8)
    except (UnidentifiedImageError, OSError, ValueError) as exc:
        raise ImageDecodeError(f"could not decode image payload: {exc}") from None
    return (array.astype(np.float32) / 255.0).copy()


def read_image(path: str | Path) -> np.ndarray:
    path = Path(path)
    try:
        data = path.read_bytes()
    except OSError as exc:
        raise ImageDecodeError(f"could not read {path}: {exc}") from None
    return decode_image(data)


def write_png(image: np.ndarray, path: str | Path) -> Path:
    """Save as 8-bit RGB PNG (lossless)."""
    image = validate_image(image)
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    as_u8 = np.clip(np.rint(image * 255.0), 0, 255).astype(np.uint8)
    Image.fromarray(as_u8, mode="RGB").save(path, format="PNG")
    return path


def encode_png(image: np.ndarray) -> bytes:
    image = validate_image(image)
    as_u8 = np.clip(np.rint(image * 255.0), 0, 255).astype(np.uint8)
    buf = io.BytesIO()
    Image.fromarray(as_u8, mode="RGB").save(buf, format="PNG")
    return buf.getvalue()


def resize_bilinear(image: np.ndarray, height: int, width: int) -> np.ndarray:
    """Deterministic bilinear resize; preserves the [0,1] range."""
    image = validate_image(image).astype(np.float32, copy=False)
    out = cv2.resize(image, (width, height), interpolation=cv2.INTER_LINEAR)
    return np.clip(out, 0.0, 1.0)


def preprocess(image: np.ndarray, size: int = INPUT_SIZE) -> np.ndarray:
    """Apply the network input contract: bilinear resize to size x size."""
    image = validate_image(image)
    if image.shape[0] == size and image.shape[1] == size:
        return image.astype(np.float32, copy=False)
    return resize_bilinear(image, size, size)
