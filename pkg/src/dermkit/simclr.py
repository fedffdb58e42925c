"""Contrastive pretraining: temperature-scaled loss and the epoch loop.

An embedding batch is a (2N, D) array whose rows 2k and 2k+1 are the two
augmented views of source k. The loss pulls each view toward its partner
and away from every other row in the batch.
"""

from __future__ import annotations

import hashlib
import math
from dataclasses import dataclass, field

import numpy as np
import torch
from torch import nn

from .augment.config import DEFAULT_PARAMS, AugmentParams
from .augment.policy import simclr_view_pair
from .errors import ContractError, TrainingDiverged
from .images import read_image
from .manifest import DatasetManifest


def scaled_cosine_similarity(z_i, z_j, temperature: float) -> float:
    """Cosine similarity divided by the temperature; symmetric, in [-1/t, 1/t]."""
    if temperature <= 0:
        raise ContractError(f"temperature must be positive, got {temperature}")
    a = np.asarray(z_i, dtype=np.float64).ravel()
    b = np.asarray(z_j, dtype=np.float64).ravel()
    na = np.linalg.norm(a)
    nb = np.linalg.norm(b)
    if na == 0.0 or nb == 0.0:
        raise ContractError("zero-norm vector has no cosine similarity")
    return float(a @ b / (temperature * na * nb))


def _validate_batch(z: torch.Tensor) -> torch.Tensor:
    if z.ndim != 2:
        raise ContractError(f"embedding batch must be 2-D, got shape {tuple(z.shape)}")
    rows = z.shape[0]
    if rows == 0 or rows % 2 != 0:
        raise ContractError(f"embedding batch needs a positive even row count, got {rows}")
    norms = z.norm(dim=1)
    if bool((norms == 0).any()):
        raise ContractError("embedding batch contains a zero-norm row")
    return z


def nt_xent_loss(batch, temperature: float):
    """Average contrastive loss over all 2N (view, partner) orderings.

    Accepts a torch tensor (returns a differentiable scalar tensor) or any
    array-like (returns a float, computed in float64). Exactly zero when
    N = 1: the normalizing sum then contains only the positive term.
    """
    if temperature <= 0:
        raise ContractError(f"temperature must be positive, got {temperature}")
    return_float = not isinstance(batch, torch.Tensor)
    z = batch if isinstance(batch, torch.Tensor) else torch.as_tensor(
        np.asarray(batch, dtype=np.float64)
    )
    if not z.is_floating_point():
        z = z.double()
    z = _validate_batch(z)
    rows = z.shape[0]

    normed = nn.functional.normalize(z, dim=1)
    sim = normed @ normed.T / temperature
    eye = torch.eye(rows, dtype=torch.bool, device=z.device)
    sim = sim.masked_fill(eye, float("-inf"))
    log_denominator = torch.logsumexp(sim, dim=1)

    idx = torch.arange(rows, device=z.device)
    partner = idx ^ 1  # 2k <-> 2k+1
    positives = sim[idx, partner]
    loss = (log_denominator - positives).mean()
    return float(loss.item()) if return_float else loss


class ProjectionHead(nn.Module):
    """Two affine layers with a ReLU between, mapping features to the
    contrastive space. Discarded for downstream classification."""

    def __init__(self, input_dim: int, hidden_dim: int | None = None, output_dim: int = 128):
        super().__init__()
        if input_dim < 1 or output_dim < 1:
            raise ContractError("projection head dimensions must be positive")
        hidden_dim = input_dim if hidden_dim is None else hidden_dim
        self.input_dim = input_dim
        self.output_dim = output_dim
        self.net = nn.Sequential(
            nn.Linear(input_dim, hidden_dim),
            nn.ReLU(inplace=True),
            nn.Linear(hidden_dim, output_dim),
        )

    def forward(self, h: torch.Tensor) -> torch.Tensor:
        return self.net(h)


@dataclass
class PretrainConfig:
    epochs: int = 100
    batch_pairs: int = 64
    temperature: float = 0.5
    learning_rate: float = 0.05
    momentum: float = 0.9
    cosine_decay: bool = True
    seed: int = 0
    view_size: int = 224
    augment_params: AugmentParams = field(default_factory=lambda: DEFAULT_PARAMS)
    cache_images: bool = True

    def __post_init__(self):
        if self.epochs < 0:
            raise ContractError("epochs must be non-negative")
        if self.batch_pairs < 1:
            raise ContractError("batch_pairs must be positive")
        if self.temperature <= 0:
            raise ContractError("temperature must be positive")


@dataclass
class PretrainResult:
    loss_curve: list[float]
    config: PretrainConfig
    corpus_fingerprint: str


def manifest_fingerprint(manifest: DatasetManifest) -> str:
    digest = hashlib.sha256()
    for rec in manifest:
        digest.update(rec.path.encode("utf-8"))
        digest.update(b"|")
        digest.update((rec.label.name if rec.label else "").encode("utf-8"))
        digest.update(b"\n")
    return digest.hexdigest()[:16]


class _ImageStore:
    """Lazy decoded-image cache keyed by manifest index."""

    def __init__(self, manifest: DatasetManifest, cache: bool):
        self.manifest = manifest
        self.cache_enabled = cache
        self._cache: dict[int, np.ndarray] = {}

    def get(self, index: int) -> np.ndarray:
        if index in self._cache:
            return self._cache[index]
        image = read_image(self.manifest.resolve(self.manifest.records[index]))
        if self.cache_enabled:
            self._cache[index] = image
        return image


def pretrain(
    encoder: nn.Module,
    head: ProjectionHead,
    data: DatasetManifest,
    config: PretrainConfig,
) -> PretrainResult:
    """Contrastive pretraining over an unlabeled manifest.

    Each epoch shuffles the corpus, turns every image into a fresh view
    pair, and takes one SGD step per batch on the contrastive loss. The
    encoder and head are updated in place; the per-epoch mean loss comes
    back as the curve (exactly ``epochs`` entries). Reproducibility
    contract: a fixed seed fixes the data order and augmentation draws.
    """
    if len(data) == 0:
        raise ContractError("pretraining corpus is empty")
    if config.batch_pairs > len(data):
        raise ContractError(
            f"batch_pairs {config.batch_pairs} exceeds corpus size {len(data)}"
        )

    fingerprint = manifest_fingerprint(data)
    if config.epochs == 0:
        return PretrainResult([], config, fingerprint)

    store = _ImageStore(data, config.cache_images)
    params = list(encoder.parameters()) + list(head.parameters())
    optimizer = torch.optim.SGD(params, lr=config.learning_rate, momentum=config.momentum)
    torch.manual_seed(config.seed & 0xFFFFFFFF)

    loss_curve: list[float] = []
    encoder.train()
    head.train()
    for epoch in range(config.epochs):
        if config.cosine_decay:
            scale = 0.5 * (1.0 + math.cos(math.pi * epoch / config.epochs))
            for group in optimizer.param_groups:
                group["lr"] = config.learning_rate * scale

        order = np.random.default_rng(
            np.random.SeedSequence([config.seed & 0xFFFFFFFFFFFFFFFF, epoch])
        ).permutation(len(data))

        epoch_losses: list[float] = []
        for start in range(0, len(order), config.batch_pairs):
            chunk = order[start : start + config.batch_pairs]
            if len(chunk) < 2:
                continue  # a single pair carries no gradient
            views = []
            for index in chunk:
                image = store.get(int(index))
                draw = epoch * len(data) + int(index)
                v1, v2 = simclr_view_pair(
                    image, seed=config.seed, draw=draw,
                    size=config.view_size, params=config.augment_params,
                )
                views.append(v1)
                views.append(v2)
            batch = torch.from_numpy(np.stack(views)).permute(0, 3, 1, 2).contiguous()

            optimizer.zero_grad()
            embeddings = head(encoder(batch))
            loss = nt_xent_loss(embeddings, config.temperature)
            if not torch.isfinite(loss):
                raise TrainingDiverged("contrastive loss is not finite", epoch=epoch)
            loss.backward()
            optimizer.step()
            epoch_losses.append(float(loss.item()))

        mean_loss = float(np.mean(epoch_losses))
        if not math.isfinite(mean_loss):
            raise TrainingDiverged("contrastive loss is not finite", epoch=epoch)
        loss_curve.append(mean_loss)

    encoder.eval()
    head.eval()
    return PretrainResult(loss_curve, config, fingerprint)
