"""Checkpoint files and their sidecar metadata records.

Two kinds share one container: ``ssl`` checkpoints hold encoder plus
projection head (and the loss curve); ``classifier`` checkpoints hold
encoder plus scoring head (and the training curves). Every save also
writes ``<file>.meta.json`` with the seed, config echo, and corpus
fingerprint so a run can be traced without unpickling anything.
"""

from __future__ import annotations

import datetime as _dt
import hashlib
import json
from pathlib import Path
from typing import Any

import torch

from . import __version__
from .classifier import ClassifierModel
from .encoders import create_encoder
from .errors import ContractError
from .labels import CLASS_NAMES
from .simclr import ProjectionHead

FORMAT = "dermkit-checkpoint/1"


def _write_sidecar(path: Path, payload: dict[str, Any]) -> None:
    meta = dict(payload)
    meta["created_at"] = _dt.datetime.now(_dt.timezone.utc).isoformat()
    meta["toolkit_version"] = __version__
    sidecar = Path(str(path) + ".meta.json")
    sidecar.write_text(json.dumps(meta, indent=2, sort_keys=True) + "\n", encoding="utf-8")


def checkpoint_digest(path: str | Path) -> str:
    """Short content hash used as the served model version."""
    digest = hashlib.sha256(Path(path).read_bytes()).hexdigest()
    return digest[:12]


def save_ssl_checkpoint(
    path: str | Path,
    encoder,
    head: ProjectionHead,
    config_echo: dict[str, Any],
    loss_curve: list[float],
    corpus_fingerprint: str,
) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    torch.save(
        {
            "format": FORMAT,
            "kind": "ssl",
            "encoder_name": encoder.spec.name,
            "feature_dim": encoder.spec.feature_dim,
            "encoder_state": encoder.state_dict(),
            "projection_state": head.state_dict(),
            "projection_dims": (head.input_dim, head.output_dim),
            "config": config_echo,
            "loss_curve": list(loss_curve),
            "corpus_fingerprint": corpus_fingerprint,
        },
        path,
    )
    _write_sidecar(
        path,
        {
            "kind": "ssl",
            "encoder": encoder.spec.name,
            "config": config_echo,
            "epochs_recorded": len(loss_curve),
            "corpus_fingerprint": corpus_fingerprint,
        },
    )
    return path


def save_classifier_checkpoint(
    path: str | Path,
    model: ClassifierModel,
    config_echo: dict[str, Any],
    curves: dict[str, list[float]] | None = None,
    extra: dict[str, Any] | None = None,
) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    torch.save(
        {
            "format": FORMAT,
            "kind": "classifier",
            "encoder_name": model.encoder.spec.name,
            "feature_dim": model.encoder.spec.feature_dim,
            "state": model.state_dict(),
            "classes": list(CLASS_NAMES),
            "config": config_echo,
            "curves": curves or {},
        },
        path,
    )
    _write_sidecar(path, {"kind": "classifier", "encoder": model.encoder.spec.name,
                          "config": config_echo, **(extra or {})})
    return path


def _load(path: str | Path) -> dict[str, Any]:
    path = Path(path)
    if not path.is_file():
        raise ContractError(f"checkpoint not found: {path}")
    payload = torch.load(path, map_location="cpu", weights_only=True)
    if not isinstance(payload, dict) or payload.get("format") != FORMAT:
        raise ContractError(f"{path} is not a recognized checkpoint")
    return payload


def load_classifier_checkpoint(path: str | Path) -> tuple[ClassifierModel, dict[str, Any]]:
    payload = _load(path)
    if payload["kind"] != "classifier":
        raise ContractError(f"{path} holds a {payload['kind']!r} checkpoint, not a classifier")
    model = ClassifierModel(create_encoder(payload["encoder_name"]))
    model.load_state_dict(payload["state"])
    model.eval()
    return model, payload


def load_ssl_checkpoint(path: str | Path) -> tuple[Any, ProjectionHead, dict[str, Any]]:
    payload = _load(path)
    if payload["kind"] != "ssl":
        raise ContractError(f"{path} holds a {payload['kind']!r} checkpoint, not an ssl run")
    encoder = create_encoder(payload["encoder_name"])
    encoder.load_state_dict(payload["encoder_state"])
    input_dim, output_dim = payload["projection_dims"]
    head = ProjectionHead(input_dim, output_dim=output_dim)
    head.load_state_dict(payload["projection_state"])
    encoder.eval()
    head.eval()
    return encoder, head, payload


def load_encoder_weights(path: str | Path):
    """Pull just the encoder out of either checkpoint kind (for fine-tune init)."""
    payload = _load(path)
    encoder = create_encoder(payload["encoder_name"])
    if payload["kind"] == "ssl":
        encoder.load_state_dict(payload["encoder_state"])
    else:
        encoder_state = {
            key.removeprefix("encoder."): value
            for key, value in payload["state"].items()
            if key.startswith("encoder.")
        }
        encoder.load_state_dict(encoder_state)
    encoder.eval()
    return encoder
