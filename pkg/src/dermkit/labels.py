"""The eight-class output space of the classifier.

Class names are case-sensitive and carry a stable integer index in
alphabetical order. Every confusion matrix, probability vector, and wire
payload in the toolkit is ordered by this index.
"""

from __future__ import annotations

import enum

from .errors import ContractError


class ClassLabel(enum.IntEnum):
    """Skin condition classes, indexed 0-7 alphabetically."""

    Bullous = 0
    Chickenpox = 1
    Eczema = 2
    Measles = 3
    Mpox = 4
    Normal = 5
    Urticaria = 6
    Vasculitis = 7

    def __str__(self) -> str:
        return self.name


CLASS_NAMES: tuple[str, ...] = tuple(label.name for label in ClassLabel)
NUM_CLASSES = len(CLASS_NAMES)

# Mpox-only annotation vocabularies. Grade IV images are recorded as
# "Others" (close-range shots); grades partition by body part.
GRADES: tuple[str, ...] = ("I", "II", "III", "Others")
STAGES: tuple[str, ...] = ("earlier", "later")


def parse_label(name: str) -> ClassLabel:
    """Look up a class by its serialized (case-sensitive) name."""
    try:
        return ClassLabel[name]
    except KeyError:
        raise ContractError(
            f"unknown class {name!r}; expected one of {', '.join(CLASS_NAMES)}"
        ) from None
