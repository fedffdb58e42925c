from .config import AugmentParams, load_augment_config, save_augment_config
from .ops import OP_KINDS, AugmentationOp
from .policy import (
    AugmentationPolicy,
    apply_policy,
    full_policy,
    simclr_view_pair,
)
from .expand import expand_scarce_classes, plan_expansion_targets

__all__ = [
    "AugmentParams",
    "AugmentationOp",
    "AugmentationPolicy",
    "OP_KINDS",
    "apply_policy",
    "expand_scarce_classes",
    "full_policy",
    "load_augment_config",
    "plan_expansion_targets",
    "save_augment_config",
    "simclr_view_pair",
]
