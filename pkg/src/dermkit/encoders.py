"""Pluggable backbone encoders.

Every encoder follows one contract: ``spatial_features(x)`` returns the
last spatial feature block (B, C, h, w) and ``forward(x)`` is its global
average pool, a (B, feature_dim) representation. The spatial block is
what the class-activation explainer hooks into.
"""

from __future__ import annotations

from dataclasses import dataclass

import torch
from torch import nn

from .errors import ContractError


@dataclass(frozen=True)
class EncoderSpec:
    name: str
    feature_dim: int

    def __post_init__(self):
        if self.feature_dim < 1:
            raise ContractError("feature_dim must be positive")


class Encoder(nn.Module):
    """Base class fixing the spatial-features + pooled-forward contract."""

    def __init__(self, name: str, feature_dim: int):
        super().__init__()
        self.spec = EncoderSpec(name, feature_dim)

    @property
    def feature_dim(self) -> int:
        return self.spec.feature_dim

    def spatial_features(self, x: torch.Tensor) -> torch.Tensor:
        raise NotImplementedError

    def pool(self, features: torch.Tensor) -> torch.Tensor:
        return nn.functional.adaptive_avg_pool2d(features, 1).flatten(1)

    def forward(self, x: torch.Tensor) -> torch.Tensor:
        return self.pool(self.spatial_features(x))


class SmallConvNet(Encoder):
    """Four-stage CNN sized for desk-scale CPU runs (feature_dim 128)."""

    def __init__(self):
        super().__init__("small", 128)
        self.features = nn.Sequential(
            nn.Conv2d(3, 16, kernel_size=5, stride=4, padding=2),
            nn.BatchNorm2d(16),
            nn.ReLU(inplace=True),
            nn.Conv2d(16, 32, kernel_size=3, stride=2, padding=1),
            nn.BatchNorm2d(32),
            nn.ReLU(inplace=True),
            nn.Conv2d(32, 64, kernel_size=3, stride=2, padding=1),
            nn.BatchNorm2d(64),
            nn.ReLU(inplace=True),
            nn.Conv2d(64, 128, kernel_size=3, stride=2, padding=1),
            nn.BatchNorm2d(128),
            nn.ReLU(inplace=True),
        )

    def spatial_features(self, x: torch.Tensor) -> torch.Tensor:
        return self.features(x)


class _TorchvisionEncoder(Encoder):
    """Wraps a torchvision backbone's convolutional trunk."""

    def __init__(self, name: str, trunk: nn.Module, feature_dim: int):
        super().__init__(name, feature_dim)
        self.trunk = trunk

    def spatial_features(self, x: torch.Tensor) -> torch.Tensor:
        return self.trunk(x)


def _build_torchvision(name: str) -> Encoder:
    from torchvision import models as tvm

    if name.startswith(("resnet", "resnext", "wide_resnet")):
        model = getattr(tvm, name)(weights=None)
        trunk = nn.Sequential(
            model.conv1, model.bn1, model.relu, model.maxpool,
            model.layer1, model.layer2, model.layer3, model.layer4,
        )
        return _TorchvisionEncoder(name, trunk, model.fc.in_features)
    if name.startswith("efficientnet"):
        model = getattr(tvm, name)(weights=None)
        return _TorchvisionEncoder(name, model.features, model.classifier[1].in_features)
    if name.startswith("densenet"):
        model = getattr(tvm, name)(weights=None)
        return _TorchvisionEncoder(name, model.features, model.classifier.in_features)
    if name.startswith("vgg"):
        model = getattr(tvm, name)(weights=None)
        return _TorchvisionEncoder(name, model.features, 512)
    raise ContractError(f"unsupported torchvision backbone {name!r}")


TORCHVISION_NAMES = (
    "resnet18",
    "resnet50",
    "resnet101",
    "resnext101_64x4d",
    "efficientnet_b0",
    "densenet201",
    "vgg19",
)


def encoder_names() -> tuple[str, ...]:
    return ("small",) + TORCHVISION_NAMES


def create_encoder(name: str) -> Encoder:
    if name == "small":
        return SmallConvNet()
    if name in TORCHVISION_NAMES:
        return _build_torchvision(name)
    raise ContractError(
        f"unknown encoder {name!r}; available: {', '.join(encoder_names())}"
    )
