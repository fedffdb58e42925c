import numpy as np
import pytest
import torch
from torch import nn

from dermkit.classifier import ClassifierModel
from dermkit.checkpoints import save_classifier_checkpoint
from dermkit.encoders import Encoder, SmallConvNet
from dermkit.synthetic import build_labeled_corpus


def rand_image(rng: np.random.Generator, h: int = 32, w: int = 32) -> np.ndarray:
    return rng.random((h, w, 3)).astype(np.float32)


class ChannelMeanEncoder(Encoder):
    """Probe encoder whose three features are the R/G/B channel means."""

    def __init__(self):
        super().__init__("probe-rgb", 3)
        conv = nn.Conv2d(3, 3, kernel_size=1, bias=False)
        with torch.no_grad():
            conv.weight.zero_()
            for c in range(3):
                conv.weight[c, c, 0, 0] = 1.0
        self.conv = conv

    def spatial_features(self, x):
        return self.conv(x)


def make_probe_model() -> ClassifierModel:
    """Classifier over the RGB-mean probe encoder with a zeroed head."""
    model = ClassifierModel(ChannelMeanEncoder())
    with torch.no_grad():
        model.head.weight.zero_()
        model.head.bias.zero_()
    model.eval()
    return model


@pytest.fixture(scope="session")
def tagged_corpus(tmp_path_factory):
    root = tmp_path_factory.mktemp("tagged-corpus")
    return build_labeled_corpus(root, per_class=6, seed=11, size=48, tag_mpox=True)


@pytest.fixture(scope="session")
def quick_model():
    torch.manual_seed(7)
    model = ClassifierModel(SmallConvNet())
    model.eval()
    return model


@pytest.fixture(scope="session")
def quick_checkpoint(tmp_path_factory, quick_model):
    path = tmp_path_factory.mktemp("ckpt") / "quick.pt"
    save_classifier_checkpoint(path, quick_model, config_echo={"seed": 7, "note": "untrained"})
    return path


@pytest.fixture(scope="session")
def confident_checkpoint(tmp_path_factory):
    """Model that always answers Bullous with probability ~1 (bias-only head)."""
    torch.manual_seed(3)
    model = ClassifierModel(SmallConvNet())
    with torch.no_grad():
        model.head.weight.zero_()
        model.head.bias.zero_()
        model.head.bias[0] = 25.0
    model.eval()
    path = tmp_path_factory.mktemp("ckpt-confident") / "confident.pt"
    save_classifier_checkpoint(path, model, config_echo={"seed": 3, "note": "bias-only"})
    return path


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    lines = []
    for outcome in ("passed", "failed", "error"):
        for report in terminalreporter.stats.get(outcome, []):
            if "test_acceptance" in report.nodeid and report.when == "call":
                name = report.nodeid.split("::")[-1]
                lines.append((name, outcome == "passed"))
    if lines:
        terminalreporter.write_sep("=", "acceptance criteria")
        for name, ok in lines:
            terminalreporter.write_line(f"[{'PASS' if ok else 'FAIL'}] {name}")
