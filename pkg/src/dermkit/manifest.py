"""Dataset manifests: ingestion, census, and stratified splitting.

A manifest is a UTF-8 CSV with header ``path,label,grade,stage,source``.
Image paths are stored relative to the manifest's directory; empty cells
mean "absent". A manifest is labeled iff every record carries a label;
the self-supervised corpus is an unlabeled manifest.
"""

from __future__ import annotations

import csv
import os
from collections import Counter
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Iterable, Iterator

import numpy as np

from .errors import ContractError, ManifestError
from .labels import GRADES, STAGES, ClassLabel, parse_label

MANIFEST_COLUMNS = ("path", "label", "grade", "stage", "source")


@dataclass(frozen=True)
class ImageRecord:
    """One image row: relative path plus optional label and Mpox tags."""

    path: str
    label: ClassLabel | None = None
    grade: str | None = None
    stage: str | None = None
    source: str = ""

    def __post_init__(self):
        if not self.path:
            raise ContractError("record path must be non-empty")
        if self.grade is not None and self.grade not in GRADES:
            raise ContractError(f"grade must be one of {GRADES}, got {self.grade!r}")
        if self.stage is not None and self.stage not in STAGES:
            raise ContractError(f"stage must be one of {STAGES}, got {self.stage!r}")
        if (self.grade is not None or self.stage is not None) and self.label is not ClassLabel.Mpox:
            raise ContractError(
                f"grade/stage tags are only valid on Mpox records, got label={self.label}"
            )


@dataclass(frozen=True)
class DatasetManifest:
    """An ordered, duplicate-free collection of image records.

    ``base_dir`` anchors the records' relative paths; ``resolve`` turns a
    record into an absolute file path.
    """

    records: tuple[ImageRecord, ...]
    name: str = "manifest"
    base_dir: Path = field(default_factory=Path.cwd)

    def __post_init__(self):
        object.__setattr__(self, "records", tuple(self.records))
        object.__setattr__(self, "base_dir", Path(self.base_dir))
        seen: set[str] = set()
        for rec in self.records:
            if rec.path in seen:
                raise ContractError(f"duplicate path in manifest: {rec.path!r}")
            seen.add(rec.path)

    @property
    def labeled(self) -> bool:
        """True iff every record has a label (vacuously true when empty)."""
        return all(rec.label is not None for rec in self.records)

    def __len__(self) -> int:
        return len(self.records)

    def __iter__(self) -> Iterator[ImageRecord]:
        return iter(self.records)

    def resolve(self, record: ImageRecord) -> Path:
        return self.base_dir / record.path


def load_manifest(path: str | Path, name: str | None = None, check_files: bool = True) -> DatasetManifest:
    """Read and validate a manifest CSV.

    Raises ManifestError naming the offending line on malformed rows,
    unknown class names, misplaced grade/stage tags, duplicate paths, and
    (when ``check_files``) missing image files.
    """
    path = Path(path)
    if not path.is_file():
        raise ManifestError(f"manifest file not found: {path}")
    base_dir = path.parent

    records: list[ImageRecord] = []
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise ManifestError("manifest is empty; expected header row", line=1) from None
        if tuple(h.strip() for h in header) != MANIFEST_COLUMNS:
            raise ManifestError(
                f"bad header {header!r}; expected {','.join(MANIFEST_COLUMNS)}", line=1
            )
        for lineno, row in enumerate(reader, start=2):
            if not row or (len(row) == 1 and not row[0].strip()):
                continue
            if len(row) != len(MANIFEST_COLUMNS):
                raise ManifestError(
                    f"expected {len(MANIFEST_COLUMNS)} cells, got {len(row)}", line=lineno
                )
            raw = {col: cell.strip() for col, cell in zip(MANIFEST_COLUMNS, row)}
            try:
                record = ImageRecord(
                    path=raw["path"],
                    label=parse_label(raw["label"]) if raw["label"] else None,
                    grade=raw["grade"] or None,
                    stage=raw["stage"] or None,
                    source=raw["source"],
                )
            except ContractError as exc:
                raise ManifestError(str(exc), line=lineno) from None
            if check_files and not (base_dir / record.path).is_file():
                raise ManifestError(f"image file not found: {record.path}", line=lineno)
            records.append(record)

    manifest_name = name if name is not None else path.stem
    try:
        return DatasetManifest(tuple(records), name=manifest_name, base_dir=base_dir)
    except ContractError as exc:
        raise ManifestError(str(exc)) from None


def save_manifest(manifest: DatasetManifest, path: str | Path) -> Path:
    """Write a manifest CSV, re-anchoring record paths to the new location."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    new_base = path.parent
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(MANIFEST_COLUMNS)
        for rec in manifest:
            rel = os.path.relpath(manifest.resolve(rec), new_base)
            writer.writerow(
                [
                    Path(rel).as_posix(),
                    rec.label.name if rec.label is not None else "",
                    rec.grade or "",
                    rec.stage or "",
                    rec.source,
                ]
            )
    return path


def class_distribution(manifest: DatasetManifest) -> dict[ClassLabel, int]:
    """Per-class record counts; every class is present, possibly zero."""
    if not manifest.labeled:
        raise ContractError("class_distribution requires a fully labeled manifest")
    counts = Counter(rec.label for rec in manifest)
    return {label: counts.get(label, 0) for label in ClassLabel}


def stratified_split(
    manifest: DatasetManifest, train_fraction: float, seed: int
) -> tuple[DatasetManifest, DatasetManifest]:
    """Split a labeled manifest per class: train gets round(fraction * n).

    Rounding is half-up so every per-class train count sits within one
    record of the exact fraction. Deterministic for a fixed seed; the two
    halves partition the input.
    """
    if not (0.0 < train_fraction < 1.0):
        raise ContractError(f"train_fraction must be in (0, 1), got {train_fraction}")
    if not manifest.labeled:
        raise ContractError("stratified_split requires a fully labeled manifest")
    if len(manifest) == 0:
        raise ContractError("cannot split an empty manifest")

    rng = np.random.default_rng(np.random.SeedSequence(seed & 0xFFFFFFFFFFFFFFFF))
    by_class: dict[ClassLabel, list[int]] = {label: [] for label in ClassLabel}
    for idx, rec in enumerate(manifest):
        by_class[rec.label].append(idx)

    train_idx: list[int] = []
    test_idx: list[int] = []
    for label in ClassLabel:
        indices = by_class[label]
        if not indices:
            continue
        order = rng.permutation(len(indices))
        n_train = int(np.floor(train_fraction * len(indices) + 0.5))
        shuffled = [indices[i] for i in order]
        train_idx.extend(shuffled[:n_train])
        test_idx.extend(shuffled[n_train:])

    train_idx.sort()
    test_idx.sort()
    make = lambda idxs, suffix: DatasetManifest(
        tuple(manifest.records[i] for i in idxs),
        name=f"{manifest.name}-{suffix}",
        base_dir=manifest.base_dir,
    )
    return make(train_idx, "train"), make(test_idx, "test")


def merge_manifests(name: str, parts: Iterable[DatasetManifest], base_dir: Path) -> DatasetManifest:
    """Concatenate manifests, re-expressing every path relative to base_dir."""
    records = []
    for part in parts:
        for rec in part:
            rel = Path(os.path.relpath(part.resolve(rec), base_dir)).as_posix()
            records.append(replace(rec, path=rel))
    return DatasetManifest(tuple(records), name=name, base_dir=base_dir)
