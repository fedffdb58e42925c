import copy

import numpy as np
import pytest
import torch
from torch import nn

from conftest import rand_image
from dermkit.classifier import ClassifierModel
from dermkit.encoders import Encoder
from dermkit.errors import ContractError, UnsupportedArchitecture
from dermkit.gradcam import (
    colorize_overlay,
    gradcam_heatmap,
    relevance_colormap,
    write_heatmap_csv,
)
from dermkit.labels import ClassLabel


class SpatiallyConstantEncoder(Encoder):
    """Feature map is the image's global mean broadcast over a 7x7 grid."""

    def __init__(self, channels=4):
        super().__init__("flat-probe", channels)
        self.channels = channels

    def spatial_features(self, x):
        mean = x.mean(dim=(1, 2, 3), keepdim=True)
        return (mean + 0.1).expand(x.shape[0], self.channels, 7, 7)


class HeadlessEncoder(nn.Module):
    """Deliberately missing the spatial-features contract."""

    feature_dim = 8


class TestHeatmapContract:
    def test_shape_range_and_peak(self, quick_model):
        rng = np.random.default_rng(0)
        for _ in range(3):
            heatmap = gradcam_heatmap(quick_model, rand_image(rng, 224, 224), ClassLabel.Mpox)
            assert heatmap.shape == (224, 224)
            assert float(heatmap.min()) >= 0.0
            assert float(heatmap.max()) in (0.0, 1.0)

    def test_constant_feature_map_gives_all_ones_or_zeros(self):
        model = ClassifierModel(SpatiallyConstantEncoder())
        with torch.no_grad():
            model.head.weight.zero_()
            model.head.bias.zero_()
            model.head.weight[ClassLabel.Mpox.value, :] = 1.0  # positive pull
            model.head.weight[ClassLabel.Eczema.value, :] = -1.0  # negative pull
        image = rand_image(np.random.default_rng(1), 64, 64)
        hot = gradcam_heatmap(model, image, ClassLabel.Mpox)
        assert np.array_equal(hot, np.ones_like(hot))
        cold = gradcam_heatmap(model, image, ClassLabel.Eczema)
        assert np.array_equal(cold, np.zeros_like(cold))

    def test_score_rescaling_leaves_argmax_location(self, quick_model):
        image = rand_image(np.random.default_rng(2), 224, 224)
        model = copy.deepcopy(quick_model)
        before = gradcam_heatmap(model, image, ClassLabel.Vasculitis)
        with torch.no_grad():
            model.head.weight.mul_(3.7)
            model.head.bias.mul_(3.7)
        after = gradcam_heatmap(model, image, ClassLabel.Vasculitis)
        assert np.unravel_index(before.argmax(), before.shape) == np.unravel_index(
            after.argmax(), after.shape
        )

    def test_missing_spatial_layer_rejected(self):
        model = ClassifierModel.__new__(ClassifierModel)
        nn.Module.__init__(model)
        model.encoder = HeadlessEncoder()
        model.head = nn.Linear(8, 8)
        model.input_size = 224
        with pytest.raises(UnsupportedArchitecture):
            gradcam_heatmap(model, rand_image(np.random.default_rng(3), 32, 32), ClassLabel.Mpox)


class TestOverlay:
    def test_zero_alpha_returns_input(self):
        image = rand_image(np.random.default_rng(4), 20, 20)
        heatmap = np.random.default_rng(5).random((20, 20)).astype(np.float32)
        assert np.array_equal(colorize_overlay(heatmap, image, alpha=0.0), image)

    def test_full_alpha_endpoints(self):
        image = rand_image(np.random.default_rng(6), 10, 10)
        hot = colorize_overlay(np.ones((10, 10), dtype=np.float32), image, alpha=1.0)
        assert np.allclose(hot, [1.0, 0.0, 0.0])  # red endpoint
        cold = colorize_overlay(np.zeros((10, 10), dtype=np.float32), image, alpha=1.0)
        assert np.allclose(cold, [0.0, 0.0, 1.0])  # blue endpoint

    def test_midpoint_is_yellow(self):
        mapped = relevance_colormap(np.full((4, 4), 0.5, dtype=np.float32))
        assert np.allclose(mapped, [1.0, 1.0, 0.0])

    def test_dimension_mismatch_rejected(self):
        image = rand_image(np.random.default_rng(7), 12, 12)
        with pytest.raises(ContractError):
            colorize_overlay(np.zeros((10, 10), dtype=np.float32), image, alpha=0.5)

    def test_alpha_out_of_range_rejected(self):
        image = rand_image(np.random.default_rng(8), 8, 8)
        with pytest.raises(ContractError):
            colorize_overlay(np.zeros((8, 8), dtype=np.float32), image, alpha=1.2)

    def test_blend_stays_in_range(self):
        rng = np.random.default_rng(9)
        image = rand_image(rng, 16, 16)
        heatmap = rng.random((16, 16)).astype(np.float32)
        out = colorize_overlay(heatmap, image, alpha=0.45)
        assert out.shape == image.shape
        assert float(out.min()) >= 0.0 and float(out.max()) <= 1.0


class TestHeatmapCsv:
    def test_round_trip(self, tmp_path):
        heatmap = np.random.default_rng(10).random((6, 6))
        path = write_heatmap_csv(heatmap, tmp_path / "h.csv")
        loaded = np.loadtxt(path, delimiter=",")
        assert np.allclose(loaded, heatmap, atol=1e-8)
