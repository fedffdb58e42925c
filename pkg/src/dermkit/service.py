"""HTTP diagnosis endpoint with the manual-review triage threshold.

Contract:
  POST /api/v1/diagnose      multipart field "image" (PNG/JPEG, capped),
                             optional query heatmap=1
  GET  /api/v1/health        readiness, model version, class roster
  GET  /api/v1/reference/X   curated gallery manifest for class X

Weights load once and are swapped atomically on reload; request handling
keeps no cross-request state, so identical payloads produce identical
responses. Requests are logged structurally (no image retention).
"""

from __future__ import annotations

import base64
import json
import logging
import threading
import time
from dataclasses import dataclass
from pathlib import Path

import numpy as np
from fastapi import FastAPI, File, HTTPException, Query, UploadFile
from fastapi.responses import FileResponse, JSONResponse

from .checkpoints import checkpoint_digest, load_classifier_checkpoint
from .classifier import argmax_label, predict
from .errors import ImageDecodeError
from .gradcam import colorize_overlay, gradcam_heatmap
from .images import decode_image, encode_png, preprocess
from .labels import CLASS_NAMES, ClassLabel

log = logging.getLogger("dermkit.service")

DEFAULT_THRESHOLD = 0.6
DEFAULT_MAX_PAYLOAD = 10 * 1024 * 1024  # 10 MiB

REVIEW_PROMPT = (
    "Prediction confidence is below the triage threshold. "
    "Manual review by a clinician is required before acting on this result."
)


@dataclass
class ServiceConfig:
    checkpoint: Path | None = None
    threshold: float = DEFAULT_THRESHOLD
    max_payload_bytes: int = DEFAULT_MAX_PAYLOAD
    reference_dir: Path | None = None


class ModelRuntime:
    """Owns the loaded classifier; reloads swap it under a lock."""

    def __init__(self, checkpoint: str | Path | None = None):
        self._lock = threading.Lock()
        self.model = None
        self.version = "unloaded"
        if checkpoint is not None:
            self.reload(checkpoint)

    @property
    def ready(self) -> bool:
        return self.model is not None

    def reload(self, checkpoint: str | Path) -> None:
        model, _ = load_classifier_checkpoint(checkpoint)
        version = checkpoint_digest(checkpoint)
        with self._lock:
            self.model = model
            self.version = version

    def diagnose(self, image: np.ndarray, threshold: float, with_heatmap: bool) -> dict:
        with self._lock:
            model = self.model
            version = self.version
        probabilities = predict(model, image)
        label, probability = argmax_label(probabilities)
        needs_review = probability < threshold
        result = {
            "label": label.name,
            "probability": probability,
            "per_class": {name: float(p) for name, p in zip(CLASS_NAMES, probabilities)},
            "needs_manual_review": needs_review,
            "review_prompt": REVIEW_PROMPT if needs_review else None,
            "model_version": version,
        }
        if with_heatmap:
            resized = preprocess(image, model.input_size)
            heatmap = gradcam_heatmap(model, resized, label)
            overlay = colorize_overlay(heatmap, resized, alpha=0.45)
            result["heatmap_png_base64"] = base64.b64encode(encode_png(overlay)).decode("ascii")
        return result


def create_app(runtime: ModelRuntime, config: ServiceConfig | None = None) -> FastAPI:
    config = config or ServiceConfig()
    app = FastAPI(title="dermkit diagnosis service")

    @app.get("/api/v1/health")
    def health() -> dict:
        return {
            "status": "ready" if runtime.ready else "loading",
            "model_version": runtime.version,
            "class_roster": list(CLASS_NAMES),
        }

    @app.post("/api/v1/diagnose")
    async def diagnose(
        image: UploadFile = File(...),
        heatmap: int = Query(default=0),
    ) -> JSONResponse:
        started = time.perf_counter()
        if not runtime.ready:
            raise HTTPException(status_code=503, detail="model checkpoint not loaded yet")
        data = await image.read()
        if len(data) > config.max_payload_bytes:
            raise HTTPException(
                status_code=413,
                detail=f"payload exceeds the {config.max_payload_bytes} byte cap",
            )
        try:
            decoded = decode_image(data)
        except ImageDecodeError as exc:
            raise HTTPException(status_code=400, detail=str(exc)) from None

        result = runtime.diagnose(decoded, config.threshold, with_heatmap=bool(heatmap))
        log.info(
            "%s",
            json.dumps(
                {
                    "ts": time.time(),
                    "latency_ms": round((time.perf_counter() - started) * 1000, 2),
                    "label": result["label"],
                    "probability": round(result["probability"], 6),
                    "needs_manual_review": result["needs_manual_review"],
                }
            ),
        )
        return JSONResponse(result)

    @app.get("/api/v1/reference/{class_name}")
    def reference_gallery(class_name: str) -> dict:
        if class_name not in CLASS_NAMES:
            raise HTTPException(status_code=404, detail=f"unknown class {class_name!r}")
        images: list[str] = []
        if config.reference_dir is not None:
            class_dir = Path(config.reference_dir) / class_name
            if class_dir.is_dir():
                images = sorted(
                    p.name for p in class_dir.iterdir()
                    if p.suffix.lower() in (".png", ".jpg", ".jpeg")
                )
        return {"class": class_name, "images": images}

    @app.get("/api/v1/reference/{class_name}/{filename}")
    def reference_image(class_name: str, filename: str) -> FileResponse:
        if class_name not in CLASS_NAMES or config.reference_dir is None:
            raise HTTPException(status_code=404, detail="no such gallery")
        target = (Path(config.reference_dir) / class_name / filename).resolve()
        root = Path(config.reference_dir).resolve()
        if not target.is_file() or root not in target.parents:
            raise HTTPException(status_code=404, detail="no such image")
        return FileResponse(target)

    return app


def build_service(
    checkpoint: str | Path,
    threshold: float = DEFAULT_THRESHOLD,
    max_payload_bytes: int = DEFAULT_MAX_PAYLOAD,
    reference_dir: str | Path | None = None,
) -> FastAPI:
    runtime = ModelRuntime(checkpoint)
    config = ServiceConfig(
        checkpoint=Path(checkpoint),
        threshold=threshold,
        max_payload_bytes=max_payload_bytes,
        reference_dir=Path(reference_dir) if reference_dir else None,
    )
    return create_app(runtime, config)
