"""dermkit: skin-rash image triage toolkit.

Pipeline pieces: manifest tooling and stratified splits, an augmentation
policy engine, contrastive pretraining, supervised fine-tuning, a
five-metric evaluation suite with subset and threshold reports, heatmap
explanations, and an HTTP diagnosis service.
"""

__version__ = "0.1.0"

from .labels import CLASS_NAMES, NUM_CLASSES, ClassLabel
from .manifest import (
    DatasetManifest,
    ImageRecord,
    class_distribution,
    load_manifest,
    save_manifest,
    stratified_split,
)

__all__ = [
    "CLASS_NAMES",
    "NUM_CLASSES",
    "ClassLabel",
    "DatasetManifest",
    "ImageRecord",
    "class_distribution",
    "load_manifest",
    "save_manifest",
    "stratified_split",
    "__version__",
]
