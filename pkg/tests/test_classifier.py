import numpy as np
import pytest
import torch

from conftest import make_probe_model, rand_image
from dermkit.checkpoints import (
    load_classifier_checkpoint,
    load_encoder_weights,
    load_ssl_checkpoint,
    save_classifier_checkpoint,
    save_ssl_checkpoint,
)
from dermkit.classifier import ClassifierModel, argmax_label, predict, predict_proba
from dermkit.encoders import SmallConvNet, create_encoder, encoder_names
from dermkit.errors import ContractError
from dermkit.images import decode_image, encode_png
from dermkit.labels import ClassLabel
from dermkit.simclr import ProjectionHead


class TestPredict:
    def test_zero_head_gives_uniform_eighths(self, quick_model):
        model = ClassifierModel(quick_model.encoder)
        with torch.no_grad():
            model.head.weight.zero_()
            model.head.bias.zero_()
        probs = predict(model, rand_image(np.random.default_rng(0), 40, 40))
        assert np.allclose(probs, 0.125, atol=1e-12)

    def test_probabilities_sum_to_one(self, quick_model):
        rng = np.random.default_rng(1)
        for _ in range(5):
            probs = predict(quick_model, rand_image(rng, 37, 61))
            assert probs.shape == (8,)
            assert np.all(probs >= 0)
            assert abs(probs.sum() - 1.0) < 1e-6

    def test_any_input_size_accepted(self, quick_model):
        rng = np.random.default_rng(2)
        for h, w in ((224, 224), (30, 50), (400, 300)):
            assert predict(quick_model, rand_image(rng, h, w)).shape == (8,)

    def test_probe_model_matches_direct_arithmetic(self):
        model = make_probe_model()
        with torch.no_grad():
            model.head.weight[ClassLabel.Mpox.value, 0] = 30.0  # feature 0 = red mean
        rng = np.random.default_rng(3)
        image = rand_image(rng, 224, 224) * 0.2
        image[..., 0] = 0.9  # drive the red channel high
        probs = predict(model, image)

        means = image.mean(axis=(0, 1)).astype(np.float64)
        scores = np.zeros(8)
        scores[ClassLabel.Mpox.value] = 30.0 * means[0]
        expected = np.exp(scores) / np.exp(scores).sum()
        assert np.allclose(probs, expected, atol=1e-5)
        assert argmax_label(probs)[0] is ClassLabel.Mpox

    def test_encoding_round_trip_is_invariant(self, quick_model):
        image = rand_image(np.random.default_rng(4), 64, 64)
        baseline = predict(quick_model, image)
        decoded = decode_image(encode_png(image))
        assert np.array_equal(predict(quick_model, decoded), predict(quick_model, decoded))
        assert np.array_equal(
            predict(quick_model, decoded),
            predict(quick_model, decode_image(encode_png(decoded))),
        )
        # quantization to 8-bit moves values of the raw float image slightly
        assert np.allclose(baseline, predict(quick_model, decoded), atol=0.05)

    def test_softmax_monotone_under_increasing_score_transforms(self):
        rng = np.random.default_rng(5)
        scores = rng.normal(size=8)
        soft = lambda s: np.exp(s - s.max()) / np.exp(s - s.max()).sum()
        label_a, _ = argmax_label(soft(scores))
        label_b, _ = argmax_label(soft(2.5 * scores + 1.0))
        assert label_a is label_b


class TestArgmaxLabel:
    def test_uniform_ties_break_to_lowest_index(self):
        label, prob = argmax_label(np.full(8, 0.125))
        assert label is ClassLabel.Bullous
        assert prob == pytest.approx(0.125)

    def test_one_hot(self):
        vec = np.zeros(8)
        vec[4] = 1.0
        assert argmax_label(vec) == (ClassLabel.Mpox, 1.0)

    def test_plain_max_read_off(self):
        vec = np.array([0.05, 0.05, 0.55, 0.05, 0.1, 0.05, 0.1, 0.05])
        assert argmax_label(vec) == (ClassLabel.Eczema, pytest.approx(0.55))

    def test_wrong_length_rejected(self):
        with pytest.raises(ContractError):
            argmax_label(np.ones(7))

    def test_negative_entries_rejected(self):
        vec = np.full(8, 0.2)
        vec[3] = -0.1
        with pytest.raises(ContractError):
            argmax_label(vec)


class TestEncoders:
    def test_small_encoder_shapes(self):
        encoder = SmallConvNet()
        x = torch.randn(2, 3, 224, 224)
        spatial = encoder.spatial_features(x)
        assert spatial.shape == (2, 128, 7, 7)
        assert encoder(x).shape == (2, 128)

    def test_unknown_name_rejected(self):
        with pytest.raises(ContractError):
            create_encoder("alexnet9000")

    def test_registry_lists_small(self):
        assert "small" in encoder_names()

    def test_torchvision_adapter(self):
        encoder = create_encoder("resnet18")
        x = torch.randn(1, 3, 224, 224)
        feats = encoder.spatial_features(x)
        assert feats.shape[1] == encoder.feature_dim == 512
        assert encoder(x).shape == (1, 512)


class TestCheckpoints:
    def test_classifier_round_trip_is_bitwise(self, tmp_path, quick_model):
        probe = [rand_image(np.random.default_rng(6), 48, 48) for _ in range(3)]
        baseline = predict_proba(quick_model, probe)
        path = save_classifier_checkpoint(tmp_path / "m.pt", quick_model, {"seed": 7})
        reloaded, payload = load_classifier_checkpoint(path)
        assert np.array_equal(predict_proba(reloaded, probe), baseline)
        assert payload["classes"][4] == "Mpox"

    def test_sidecar_metadata_written(self, tmp_path, quick_model):
        path = save_classifier_checkpoint(tmp_path / "m.pt", quick_model, {"seed": 123})
        sidecar = tmp_path / "m.pt.meta.json"
        assert sidecar.is_file()
        import json

        meta = json.loads(sidecar.read_text())
        assert meta["config"]["seed"] == 123
        assert meta["kind"] == "classifier"

    def test_ssl_round_trip_and_encoder_extraction(self, tmp_path):
        torch.manual_seed(0)
        encoder = SmallConvNet().eval()
        head = ProjectionHead(encoder.feature_dim, output_dim=32).eval()
        path = save_ssl_checkpoint(
            tmp_path / "ssl.pt", encoder, head,
            config_echo={"temperature": 0.5, "seed": 0},
            loss_curve=[3.0, 2.5], corpus_fingerprint="abc123",
        )
        loaded_encoder, loaded_head, payload = load_ssl_checkpoint(path)
        x = torch.randn(2, 3, 64, 64)
        with torch.no_grad():
            assert torch.equal(loaded_encoder(x), encoder(x))
            assert torch.equal(loaded_head(encoder(x)), head(encoder(x)))
        assert payload["loss_curve"] == [3.0, 2.5]

        warm = load_encoder_weights(path)
        with torch.no_grad():
            assert torch.equal(warm(x), encoder(x))

    def test_encoder_extraction_from_classifier(self, tmp_path, quick_model):
        path = save_classifier_checkpoint(tmp_path / "m.pt", quick_model, {})
        warm = load_encoder_weights(path)
        x = torch.randn(1, 3, 64, 64)
        with torch.no_grad():
            assert torch.equal(warm(x), quick_model.encoder(x))

    def test_kind_mismatch_rejected(self, tmp_path, quick_model):
        path = save_classifier_checkpoint(tmp_path / "m.pt", quick_model, {})
        with pytest.raises(ContractError):
            load_ssl_checkpoint(path)

    def test_missing_checkpoint_rejected(self, tmp_path):
        with pytest.raises(ContractError):
            load_classifier_checkpoint(tmp_path / "ghost.pt")
