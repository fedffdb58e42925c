"""Offline corpus expansion for scarce classes.

Originals are never touched: each generated image is a fresh policy draw
over one original, written as a lossless PNG named
``<origstem>__aug<draw>.png`` with the source column pointing back at the
original row.
"""

from __future__ import annotations

import os
from dataclasses import replace
from pathlib import Path
from typing import Mapping, Sequence

from ..errors import ContractError
from ..images import read_image, write_png
from ..labels import ClassLabel
from ..manifest import DatasetManifest, ImageRecord, class_distribution
from .policy import AugmentationPolicy, apply_policy


def plan_expansion_targets(
    distribution: Mapping[ClassLabel, int],
    scarce_classes: Sequence[ClassLabel],
    total_target: int,
) -> dict[ClassLabel, int]:
    """Distribute a total-count target over the scarce classes.

    Non-scarce classes keep their counts; the remaining budget is split as
    evenly as possible (largest remainder, ties by class index), never
    dropping a class below its current count.
    """
    scarce = list(dict.fromkeys(scarce_classes))
    if not scarce:
        raise ContractError("at least one scarce class is required")
    fixed_total = sum(n for label, n in distribution.items() if label not in scarce)
    budget = total_target - fixed_total
    current = {label: distribution.get(label, 0) for label in scarce}
    if budget < sum(current.values()):
        raise ContractError(
            f"total_target {total_target} is below the current corpus size for the "
            f"requested scarce set (needs at least {fixed_total + sum(current.values())})"
        )

    # Water-fill: classes already above the even share keep their count and
    # the rest of the budget is re-split among the others.
    targets: dict[ClassLabel, int] = {}
    remaining = dict(current)
    pool = budget
    while remaining:
        share = pool / len(remaining)
        pinned = {label: n for label, n in remaining.items() if n > share}
        if not pinned:
            break
        for label, n in pinned.items():
            targets[label] = n
            pool -= n
            del remaining[label]
    if remaining:
        base = pool // len(remaining)
        leftover = pool - base * len(remaining)
        for i, label in enumerate(sorted(remaining, key=lambda c: c.value)):
            targets[label] = int(base + (1 if i < leftover else 0))
    return {label: targets[label] for label in scarce}


def expand_scarce_classes(
    manifest: DatasetManifest,
    targets: Mapping[ClassLabel, int],
    policy: AugmentationPolicy,
    output_dir: str | Path,
) -> DatasetManifest:
    """Grow targeted classes to their target counts via policy draws.

    Returns a manifest anchored at output_dir containing every original
    record (paths re-expressed) plus the generated ones. A no-op target
    map returns the input manifest untouched and writes nothing.
    """
    if not manifest.labeled:
        raise ContractError("expansion requires a fully labeled manifest")
    dist = class_distribution(manifest)
    for label, target in targets.items():
        if target < dist[label]:
            raise ContractError(
                f"target for {label.name} ({target}) is below its current count ({dist[label]})"
            )
    if all(targets[label] == dist[label] for label in targets):
        return manifest

    output_dir = Path(output_dir)
    output_dir.mkdir(parents=True, exist_ok=True)

    rebased = [
        replace(rec, path=Path(os.path.relpath(manifest.resolve(rec), output_dir)).as_posix())
        for rec in manifest.records
    ]
    generated: list[ImageRecord] = []
    draw = 0
    for label in ClassLabel:
        needed = targets.get(label, dist[label]) - dist[label]
        if needed <= 0:
            continue
        originals = [rec for rec in manifest.records if rec.label is label]
        for k in range(needed):
            original = originals[k % len(originals)]
            image = read_image(manifest.resolve(original))
            augmented = apply_policy(image, policy, draw=draw)
            rel = f"{label.name.lower()}/{Path(original.path).stem}__aug{draw}.png"
            write_png(augmented, output_dir / rel)
            generated.append(
                ImageRecord(
                    path=rel,
                    label=label,
                    grade=original.grade,
                    stage=original.stage,
                    source=f"aug:{original.path}",
                )
            )
            draw += 1

    return DatasetManifest(
        tuple(rebased) + tuple(generated),
        name=f"{manifest.name}-expanded",
        base_dir=output_dir,
    )
