import json

import numpy as np
import pytest

from dermkit.cli import main
from dermkit.labels import CLASS_NAMES
from dermkit.manifest import load_manifest


def run(*argv):
    return main([str(a) for a in argv])


@pytest.fixture(scope="module")
def demo_dir(tmp_path_factory):
    root = tmp_path_factory.mktemp("cli-demo")
    code = run(
        "dataset", "build", "--synthetic", "--out", root / "corpus.csv",
        "--per-class", 6, "--size", 48, "--seed", 3, "--tag-mpox",
    )
    assert code == 0
    return root


@pytest.fixture(scope="module")
def split_files(demo_dir):
    args = (
        "dataset", "split", "--manifest", demo_dir / "corpus.csv",
        "--train-fraction", 0.67, "--seed", 5,
        "--out-train", demo_dir / "train.csv", "--out-test", demo_dir / "test.csv",
    )
    assert run(*args) == 0
    return demo_dir / "train.csv", demo_dir / "test.csv"


@pytest.fixture(scope="module")
def trained_checkpoint(demo_dir, split_files):
    train, test = split_files
    ckpt = demo_dir / "model.pt"
    code = run(
        "finetune", "--train-manifest", train, "--test-manifest", test,
        "--encoder", "small", "--epochs", 1, "--batch-size", 16,
        "--seed", 0, "--out", ckpt,
    )
    assert code == 0
    return ckpt


class TestDatasetCommands:
    def test_build_writes_manifest_and_run_record(self, demo_dir):
        manifest = load_manifest(demo_dir / "corpus.csv")
        assert len(manifest) == 48
        record = json.loads((demo_dir / "corpus.csv.run.json").read_text())
        assert record["command"] == "dataset build"
        assert record["versions"]["dermkit"]

    def test_build_from_folder_tree(self, demo_dir, tmp_path):
        out = tmp_path / "indexed.csv"
        assert run("dataset", "build", "--images-root", demo_dir, "--out", out) == 0
        indexed = load_manifest(out)
        assert len(indexed) == 48
        assert indexed.labeled

    def test_split_is_byte_deterministic(self, demo_dir, tmp_path):
        args = lambda tag: (
            "dataset", "split", "--manifest", demo_dir / "corpus.csv",
            "--train-fraction", 0.67, "--seed", 5,
            "--out-train", tmp_path / f"train-{tag}.csv",
            "--out-test", tmp_path / f"test-{tag}.csv",
        )
        assert run(*args("a")) == 0
        assert run(*args("b")) == 0
        assert (tmp_path / "train-a.csv").read_bytes() == (tmp_path / "train-b.csv").read_bytes()
        assert (tmp_path / "test-a.csv").read_bytes() == (tmp_path / "test-b.csv").read_bytes()

    def test_stats_writes_distribution_and_figure(self, demo_dir, tmp_path, capsys):
        out = tmp_path / "stats.csv"
        figure = tmp_path / "stats.png"
        assert run(
            "dataset", "stats", "--manifest", demo_dir / "corpus.csv",
            "--out", out, "--figure", figure,
        ) == 0
        lines = out.read_text().splitlines()
        assert lines[0] == "class,count"
        assert lines[-1] == "total,48"
        assert figure.is_file()
        assert "Mpox" in capsys.readouterr().out


class TestAugmentCommand:
    def test_expand_with_explicit_targets(self, demo_dir, tmp_path):
        out_manifest = tmp_path / "expanded.csv"
        assert run(
            "augment", "expand", "--manifest", demo_dir / "corpus.csv",
            "--out-dir", tmp_path / "gen", "--out-manifest", out_manifest,
            "--targets", "Mpox=9,Measles=8", "--seed", 2,
        ) == 0
        expanded = load_manifest(out_manifest)
        assert len(expanded) == 48 + 3 + 2

    def test_expand_with_planned_total(self, demo_dir, tmp_path):
        out_manifest = tmp_path / "planned.csv"
        assert run(
            "augment", "expand", "--manifest", demo_dir / "corpus.csv",
            "--out-dir", tmp_path / "gen2", "--out-manifest", out_manifest,
            "--total-target", 60, "--scarce", "Mpox,Measles,Chickenpox",
            "--seed", 2,
        ) == 0
        assert len(load_manifest(out_manifest)) == 60


class TestTrainingCommands:
    def test_pretrain_writes_checkpoint_curve_and_figure(self, demo_dir, tmp_path):
        unlabeled = tmp_path / "ssl.csv"
        assert run(
            "dataset", "build", "--synthetic", "--unlabeled", "--out", unlabeled,
            "--count", 12, "--size", 32, "--seed", 4,
        ) == 0
        ckpt = tmp_path / "ssl.pt"
        assert run(
            "pretrain", "--manifest", unlabeled, "--encoder", "small",
            "--epochs", 1, "--batch-pairs", 6, "--view-size", 32,
            "--seed", 1, "--out", ckpt,
        ) == 0
        assert ckpt.is_file()
        assert (tmp_path / "ssl.pt.meta.json").is_file()
        assert (tmp_path / "ssl.loss.csv").read_text().startswith("epoch,contrastive_loss")
        assert (tmp_path / "ssl.loss.png").is_file()

    def test_finetune_emits_curves_and_record(self, demo_dir, trained_checkpoint):
        assert trained_checkpoint.is_file()
        assert trained_checkpoint.with_suffix(".curves.csv").is_file()
        assert trained_checkpoint.with_suffix(".curves.png").is_file()
        with open(str(trained_checkpoint) + ".run.json") as fh:
            record = json.load(fh)
        assert record["command"] == "finetune"

    def test_finetune_warm_start_from_ssl(self, demo_dir, split_files, tmp_path):
        unlabeled = tmp_path / "ssl2.csv"
        run("dataset", "build", "--synthetic", "--unlabeled", "--out", unlabeled,
            "--count", 10, "--size", 32, "--seed", 6)
        ssl_ckpt = tmp_path / "ssl2.pt"
        run("pretrain", "--manifest", unlabeled, "--epochs", 0, "--batch-pairs", 4,
            "--seed", 1, "--out", ssl_ckpt)
        train, test = split_files
        assert run(
            "finetune", "--train-manifest", train, "--test-manifest", test,
            "--init", ssl_ckpt, "--epochs", 1, "--batch-size", 16,
            "--seed", 0, "--out", tmp_path / "warm.pt",
        ) == 0


class TestReportCommands:
    def test_evaluate_writes_schema_and_figures(self, demo_dir, trained_checkpoint, tmp_path):
        report_path = tmp_path / "report.json"
        assert run(
            "evaluate", "--checkpoint", trained_checkpoint,
            "--manifest", demo_dir / "test.csv",
            "--out", report_path, "--csv", tmp_path / "report.csv",
            "--figures-dir", tmp_path,
        ) == 0
        report = json.loads(report_path.read_text())
        assert set(report) == {"accuracy", "per_class", "confusion_matrix"}
        assert set(report["per_class"]) == set(CLASS_NAMES)
        matrix = np.array(report["confusion_matrix"])
        assert matrix.shape == (8, 8)
        assert matrix.sum() == len(load_manifest(demo_dir / "test.csv"))
        assert (tmp_path / "confusion_matrix.png").is_file()
        assert (tmp_path / "per_class_metrics.png").is_file()
        assert (tmp_path / "report.csv").read_text().startswith("class,precision")

    def test_grade_eval_reports_subsets(self, demo_dir, trained_checkpoint, tmp_path):
        out = tmp_path / "grades.json"
        assert run(
            "grade-eval", "--checkpoint", trained_checkpoint,
            "--manifest", demo_dir / "corpus.csv", "--key", "grade",
            "--out", out, "--csv", tmp_path / "grades.csv",
        ) == 0
        payload = json.loads(out.read_text())
        assert payload["partition_key"] == "grade"
        assert all(0.0 <= s["recall"] <= 1.0 for s in payload["subsets"])

    def test_threshold_report_and_figure(self, demo_dir, trained_checkpoint, tmp_path):
        out = tmp_path / "threshold.json"
        assert run(
            "threshold-report", "--checkpoint", trained_checkpoint,
            "--manifest", demo_dir / "test.csv", "--threshold", 0.6,
            "--out", out, "--figure", tmp_path / "probs.png",
        ) == 0
        payload = json.loads(out.read_text())
        assert set(payload) == {"threshold", "coverage", "accuracy_at_or_above", "accuracy_below"}
        assert (tmp_path / "probs.png").is_file()

    def test_gradcam_writes_overlay_and_grid(self, demo_dir, trained_checkpoint, tmp_path):
        manifest = load_manifest(demo_dir / "corpus.csv")
        image_path = manifest.resolve(manifest.records[0])
        assert run(
            "gradcam", "--checkpoint", trained_checkpoint, "--image", image_path,
            "--out", tmp_path / "overlay.png", "--heatmap-csv", tmp_path / "heat.csv",
        ) == 0
        assert (tmp_path / "overlay.png").is_file()
        grid = np.loadtxt(tmp_path / "heat.csv", delimiter=",")
        assert grid.shape == (224, 224)


class TestErrorPaths:
    def test_unknown_subcommand_exits_2(self):
        with pytest.raises(SystemExit) as excinfo:
            run("fnord")
        assert excinfo.value.code == 2

    def test_contract_violation_exits_1(self, tmp_path, capsys):
        code = run(
            "evaluate", "--checkpoint", tmp_path / "ghost.pt",
            "--manifest", tmp_path / "ghost.csv", "--out", tmp_path / "r.json",
        )
        assert code == 1
        assert "error:" in capsys.readouterr().err
