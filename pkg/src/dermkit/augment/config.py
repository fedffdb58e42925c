"""Augmentation hyperparameters, centralized and file-loadable.

All numeric ranges live here so a run can be reproduced from one flat
key-value file. Interpolation is bilinear throughout and is recorded in
the file for audit, not because it is tunable.
"""

from __future__ import annotations

import dataclasses
from dataclasses import dataclass
from pathlib import Path

from ..errors import ContractError


@dataclass(frozen=True)
class AugmentParams:
    noise_sigma_min: float = 0.01
    noise_sigma_max: float = 0.05
    crop_scale_min: float = 0.6
    crop_scale_max: float = 1.0
    rotation_deg: float = 25.0
    translate_frac: float = 0.10
    shear_deg: float = 8.0
    cutout_frac_min: float = 0.10
    cutout_frac_max: float = 0.20
    gamma_min: float = 0.7
    gamma_max: float = 1.5
    blur_sigma_min: float = 0.5
    blur_sigma_max: float = 1.5
    jitter_factor_min: float = 0.6
    jitter_factor_max: float = 1.4
    hue_shift: float = 0.1
    interpolation: str = "bilinear"

    def __post_init__(self):
        pairs = [
            ("noise_sigma", self.noise_sigma_min, self.noise_sigma_max),
            ("crop_scale", self.crop_scale_min, self.crop_scale_max),
            ("cutout_frac", self.cutout_frac_min, self.cutout_frac_max),
            ("gamma", self.gamma_min, self.gamma_max),
            ("blur_sigma", self.blur_sigma_min, self.blur_sigma_max),
            ("jitter_factor", self.jitter_factor_min, self.jitter_factor_max),
        ]
        for name, lo, hi in pairs:
            if lo > hi:
                raise ContractError(f"{name}_min must not exceed {name}_max ({lo} > {hi})")
        if self.noise_sigma_min < 0:
            raise ContractError("noise sigma must be non-negative")
        if not (0.0 < self.crop_scale_min and self.crop_scale_max <= 1.0):
            raise ContractError("crop scale range must lie in (0, 1]")
        if not (0.0 < self.cutout_frac_min and self.cutout_frac_max < 1.0):
            raise ContractError("cutout fraction range must lie in (0, 1)")
        if self.gamma_min <= 0:
            raise ContractError("gamma must be positive")
        if self.blur_sigma_min <= 0:
            raise ContractError("blur sigma must be positive")
        if self.jitter_factor_min <= 0:
            raise ContractError("jitter factors must be positive")
        if not (0.0 <= self.hue_shift <= 0.5):
            raise ContractError("hue shift half-range must lie in [0, 0.5]")
        if not (0.0 <= self.translate_frac <= 0.5):
            raise ContractError("translate fraction must lie in [0, 0.5]")
        if self.rotation_deg < 0 or self.shear_deg < 0:
            raise ContractError("rotation/shear half-ranges must be non-negative")
        if self.interpolation != "bilinear":
            raise ContractError("only bilinear interpolation is supported")


DEFAULT_PARAMS = AugmentParams()


def save_augment_config(params: AugmentParams, path: str | Path) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    lines = ["# augmentation hyperparameters (flat key = value)"]
    for f in dataclasses.fields(AugmentParams):
        lines.append(f"{f.name} = {getattr(params, f.name)}")
    path.write_text("\n".join(lines) + "\n", encoding="utf-8")
    return path


def load_augment_config(path: str | Path) -> AugmentParams:
    """Parse the flat ``key = value`` format; unknown keys are rejected."""
    path = Path(path)
    field_types = {f.name: f.type for f in dataclasses.fields(AugmentParams)}
    values: dict[str, object] = {}
    for lineno, raw in enumerate(path.read_text(encoding="utf-8").splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ContractError(f"{path}:{lineno}: expected 'key = value', got {raw!r}")
        key, _, value = line.partition("=")
        key = key.strip()
        value = value.strip()
        if key not in field_types:
            raise ContractError(f"{path}:{lineno}: unknown augmentation key {key!r}")
        values[key] = value if key == "interpolation" else float(value)
    return AugmentParams(**values)
