"""Command-line pipeline driver.

One subcommand per workflow step, flat-file artifacts, an explicit seed
on every stochastic step, and a JSON run record written next to each
command's primary output. Report-producing commands render figures
alongside their delimited output.
"""

from __future__ import annotations

import argparse
import json
import sys
import time
from pathlib import Path

from . import __version__
from .errors import DermkitError
from .labels import CLASS_NAMES, ClassLabel, parse_label


def _run_record(out_path: Path, command: str, args: argparse.Namespace, outputs: list[Path],
                started: float) -> None:
    import numpy
    import torch

    record = {
        "command": command,
        "arguments": {k: str(v) if isinstance(v, Path) else v for k, v in vars(args).items()
                      if k != "func"},
        "outputs": [str(p) for p in outputs],
        "versions": {"dermkit": __version__, "torch": torch.__version__,
                     "numpy": numpy.__version__},
        "started_at": started,
        "duration_s": round(time.time() - started, 3),
    }
    path = Path(str(out_path) + ".run.json")
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(json.dumps(record, indent=2) + "\n", encoding="utf-8")


def _load_params(args: argparse.Namespace):
    from .augment import AugmentParams, load_augment_config

    if getattr(args, "config", None):
        return load_augment_config(args.config)
    return AugmentParams()


def _parse_targets(spec: str) -> dict[ClassLabel, int]:
    targets = {}
    for part in spec.split(","):
        name, _, count = part.partition("=")
        targets[parse_label(name.strip())] = int(count)
    return targets


# ---------------------------------------------------------------- dataset


def cmd_dataset_build(args) -> int:
    from .manifest import DatasetManifest, ImageRecord, save_manifest

    started = time.time()
    out = Path(args.out)
    if args.synthetic:
        from .synthetic import build_labeled_corpus, build_unlabeled_corpus

        root = out.parent
        if args.unlabeled:
            manifest = build_unlabeled_corpus(root, count=args.count, seed=args.seed,
                                              size=args.size, name=out.stem)
        else:
            manifest = build_labeled_corpus(root, per_class=args.per_class, seed=args.seed,
                                            size=args.size, name=out.stem,
                                            tag_mpox=args.tag_mpox)
        print(f"wrote {len(manifest)} synthetic records to {out}")
    else:
        root = Path(args.images_root)
        if not root.is_dir():
            raise DermkitError(f"images root not found: {root}")
        records = []
        exts = (".png", ".jpg", ".jpeg")
        if args.unlabeled:
            for p in sorted(root.rglob("*")):
                if p.suffix.lower() in exts:
                    records.append(ImageRecord(path=p.relative_to(root).as_posix(),
                                               source=args.source))
        else:
            by_folder = {name.lower(): name for name in CLASS_NAMES}
            for class_dir in sorted(root.iterdir()):
                name = by_folder.get(class_dir.name.lower())
                if name is None or not class_dir.is_dir():
                    continue
                for p in sorted(class_dir.rglob("*")):
                    if p.suffix.lower() in exts:
                        records.append(ImageRecord(path=p.relative_to(root).as_posix(),
                                                   label=parse_label(name), source=args.source))
        from .manifest import save_manifest as _save

        manifest = DatasetManifest(tuple(records), name=out.stem, base_dir=root)
        _save(manifest, out)
        print(f"indexed {len(manifest)} images into {out}")
    _run_record(out, "dataset build", args, [out], started)
    return 0


def cmd_dataset_split(args) -> int:
    from .manifest import load_manifest, save_manifest, stratified_split

    started = time.time()
    manifest = load_manifest(args.manifest)
    train, test = stratified_split(manifest, args.train_fraction, args.seed)
    out_train = Path(args.out_train)
    out_test = Path(args.out_test)
    save_manifest(train, out_train)
    save_manifest(test, out_test)
    print(f"split {len(manifest)} records into {len(train)} train / {len(test)} test")
    _run_record(out_train, "dataset split", args, [out_train, out_test], started)
    return 0


def cmd_dataset_stats(args) -> int:
    import csv

    from .manifest import class_distribution, load_manifest

    started = time.time()
    manifest = load_manifest(args.manifest)
    distribution = class_distribution(manifest)
    for label in ClassLabel:
        print(f"{label.name:>12}: {distribution[label]}")
    print(f"{'total':>12}: {len(manifest)}")

    outputs: list[Path] = []
    if args.out:
        out = Path(args.out)
        out.parent.mkdir(parents=True, exist_ok=True)
        with open(out, "w", newline="", encoding="utf-8") as fh:
            writer = csv.writer(fh, lineterminator="\n")
            writer.writerow(["class", "count"])
            for label in ClassLabel:
                writer.writerow([label.name, distribution[label]])
            writer.writerow(["total", len(manifest)])
        outputs.append(out)
        if args.figure:
            from .figures import save_class_distribution

            outputs.append(save_class_distribution(distribution, args.figure))
        _run_record(out, "dataset stats", args, outputs, started)
    return 0


# ---------------------------------------------------------------- augment


def cmd_augment_expand(args) -> int:
    from .augment import expand_scarce_classes, full_policy, plan_expansion_targets
    from .manifest import class_distribution, load_manifest, save_manifest

    started = time.time()
    manifest = load_manifest(args.manifest)
    distribution = class_distribution(manifest)

    if args.targets:
        targets = _parse_targets(args.targets)
    elif args.total_target:
        scarce = [parse_label(n.strip()) for n in args.scarce.split(",")]
        targets = plan_expansion_targets(distribution, scarce, args.total_target)
        print("planned targets:",
              ", ".join(f"{c.name}={n}" for c, n in targets.items()))
    else:
        raise DermkitError("provide either --targets or --total-target with --scarce")

    policy = full_policy(
        seed=args.seed,
        params=_load_params(args),
        per_op_probability=args.per_op_probability,
        shuffle_order=not args.ordered,
    )
    expanded = expand_scarce_classes(manifest, targets, policy, args.out_dir)
    out_manifest = Path(args.out_manifest)
    save_manifest(expanded, out_manifest)
    print(f"expanded {len(manifest)} -> {len(expanded)} records; manifest at {out_manifest}")
    _run_record(out_manifest, "augment expand", args, [out_manifest, Path(args.out_dir)], started)
    return 0


# ---------------------------------------------------------------- training


def cmd_pretrain(args) -> int:
    from .checkpoints import save_ssl_checkpoint
    from .encoders import create_encoder
    from .manifest import load_manifest
    from .simclr import PretrainConfig, ProjectionHead, pretrain

    started = time.time()
    data = load_manifest(args.manifest)
    import torch

    torch.manual_seed(args.seed & 0xFFFFFFFF)
    encoder = create_encoder(args.encoder)
    head = ProjectionHead(encoder.feature_dim, output_dim=args.projection_dim)
    config = PretrainConfig(
        epochs=args.epochs,
        batch_pairs=args.batch_pairs,
        temperature=args.temperature,
        learning_rate=args.lr,
        momentum=args.momentum,
        cosine_decay=not args.no_cosine_decay,
        seed=args.seed,
        view_size=args.view_size,
        augment_params=_load_params(args),
        cache_images=not args.no_cache_images,
    )
    result = pretrain(encoder, head, data, config)

    out = Path(args.out)
    config_echo = {
        "encoder": args.encoder,
        "epochs": config.epochs,
        "batch_pairs": config.batch_pairs,
        "temperature": config.temperature,
        "learning_rate": config.learning_rate,
        "momentum": config.momentum,
        "cosine_decay": config.cosine_decay,
        "seed": config.seed,
        "view_size": config.view_size,
    }
    save_ssl_checkpoint(out, encoder, head, config_echo, result.loss_curve,
                        result.corpus_fingerprint)
    outputs = [out]
    if result.loss_curve:
        import csv

        curve_csv = out.with_suffix(".loss.csv")
        with open(curve_csv, "w", newline="", encoding="utf-8") as fh:
            writer = csv.writer(fh, lineterminator="\n")
            writer.writerow(["epoch", "contrastive_loss"])
            for epoch, value in enumerate(result.loss_curve):
                writer.writerow([epoch, f"{value:.6f}"])
        outputs.append(curve_csv)
        from .figures import save_loss_curve

        outputs.append(save_loss_curve(result.loss_curve, out.with_suffix(".loss.png")))
        print(f"pretrained {args.epochs} epochs; final loss {result.loss_curve[-1]:.4f}")
    else:
        print("no epochs requested; checkpoint holds the initial weights")
    _run_record(out, "pretrain", args, outputs, started)
    return 0


def cmd_finetune(args) -> int:
    from .classifier import ClassifierModel
    from .encoders import create_encoder
    from .finetune import TrainConfig, finetune, write_curves_csv
    from .manifest import load_manifest

    started = time.time()
    train_set = load_manifest(args.train_manifest)
    test_set = load_manifest(args.test_manifest)

    import torch

    torch.manual_seed(args.seed & 0xFFFFFFFF)
    if args.init:
        from .checkpoints import load_encoder_weights

        encoder = load_encoder_weights(args.init)
        if encoder.spec.name != args.encoder:
            raise DermkitError(
                f"--encoder {args.encoder} does not match the checkpoint's "
                f"{encoder.spec.name!r} backbone"
            )
    else:
        encoder = create_encoder(args.encoder)
    model = ClassifierModel(encoder)

    config = TrainConfig(
        epochs=args.epochs,
        batch_size=args.batch_size,
        learning_rate=args.lr,
        momentum=args.momentum,
        seed=args.seed,
        cache_images=not args.no_cache_images,
    )
    out = Path(args.out)
    record = finetune(model, train_set, test_set, config, checkpoint_path=out)
    outputs = [out, write_curves_csv(record, out.with_suffix(".curves.csv"))]
    from .figures import save_training_curves

    outputs.append(
        save_training_curves(record.train_loss, record.test_accuracy,
                             out.with_suffix(".curves.png"))
    )
    print(
        f"best test accuracy {record.best_accuracy:.4f} at epoch {record.best_epoch}; "
        f"checkpoint at {out}"
    )
    _run_record(out, "finetune", args, outputs, started)
    return 0


# ---------------------------------------------------------------- reports


def cmd_evaluate(args) -> int:
    from .checkpoints import load_classifier_checkpoint
    from .evaluate import evaluate_manifest
    from .manifest import load_manifest
    from .metrics import report_to_dict, write_report_csv

    started = time.time()
    model, _ = load_classifier_checkpoint(args.checkpoint)
    manifest = load_manifest(args.manifest)
    result = evaluate_manifest(model, manifest)

    out = Path(args.out)
    out.parent.mkdir(parents=True, exist_ok=True)
    out.write_text(json.dumps(report_to_dict(result.report), indent=2) + "\n", encoding="utf-8")
    outputs = [out]
    if args.csv:
        outputs.append(write_report_csv(result.report, args.csv))
    figures_dir = Path(args.figures_dir) if args.figures_dir else out.parent
    from .figures import save_confusion_heatmap, save_metric_bars

    outputs.append(save_confusion_heatmap(result.confusion, figures_dir / "confusion_matrix.png"))
    outputs.append(save_metric_bars(result.report, figures_dir / "per_class_metrics.png"))
    print(f"accuracy {result.report.accuracy:.4f} over {result.confusion.total} samples")
    _run_record(out, "evaluate", args, outputs, started)
    return 0


def cmd_grade_eval(args) -> int:
    import csv

    from .checkpoints import load_classifier_checkpoint
    from .evaluate import subset_assessment
    from .manifest import load_manifest

    started = time.time()
    model, _ = load_classifier_checkpoint(args.checkpoint)
    manifest = load_manifest(args.manifest)
    reports = subset_assessment(model, manifest, args.key)

    out = Path(args.out)
    out.parent.mkdir(parents=True, exist_ok=True)
    out.write_text(
        json.dumps({"partition_key": args.key, "subsets": [r.to_dict() for r in reports]},
                   indent=2) + "\n",
        encoding="utf-8",
    )
    outputs = [out]
    if args.csv:
        csv_path = Path(args.csv)
        with open(csv_path, "w", newline="", encoding="utf-8") as fh:
            writer = csv.writer(fh, lineterminator="\n")
            writer.writerow([args.key, "count", "recall"])
            for r in reports:
                writer.writerow([r.partition, r.count, f"{r.recall:.6f}"])
        outputs.append(csv_path)
    for r in reports:
        print(f"{args.key} {r.partition:>8}: recall {r.recall:.4f} over {r.count} images")
    _run_record(out, "grade-eval", args, outputs, started)
    return 0


def cmd_threshold_report(args) -> int:
    from .checkpoints import load_classifier_checkpoint
    from .evaluate import evaluate_manifest
    from .manifest import load_manifest
    from .metrics import threshold_report

    started = time.time()
    model, _ = load_classifier_checkpoint(args.checkpoint)
    manifest = load_manifest(args.manifest)
    result = evaluate_manifest(model, manifest)
    report = threshold_report(result.top_probabilities, result.correct_flags, args.threshold)

    out = Path(args.out)
    out.parent.mkdir(parents=True, exist_ok=True)
    out.write_text(json.dumps(report.to_dict(), indent=2) + "\n", encoding="utf-8")
    outputs = [out]
    if args.figure:
        from .figures import save_probability_boxplot

        per_class: dict[ClassLabel, list[float]] = {}
        for prediction, top in zip(result.predictions, result.top_probabilities):
            per_class.setdefault(prediction, []).append(float(top))
        outputs.append(save_probability_boxplot(per_class, args.figure))
    print(
        f"coverage {report.coverage:.4f} at threshold {args.threshold}; "
        f"accuracy above: {report.accuracy_at_or_above}, below: {report.accuracy_below}"
    )
    _run_record(out, "threshold-report", args, outputs, started)
    return 0


def cmd_gradcam(args) -> int:
    from .checkpoints import load_classifier_checkpoint
    from .classifier import argmax_label, predict
    from .gradcam import colorize_overlay, gradcam_heatmap, write_heatmap_csv
    from .images import preprocess, read_image, write_png

    started = time.time()
    model, _ = load_classifier_checkpoint(args.checkpoint)
    image = read_image(args.image)
    if args.target_class:
        target = parse_label(args.target_class)
    else:
        target, probability = argmax_label(predict(model, image))
        print(f"explaining predicted class {target.name} (p={probability:.4f})")

    resized = preprocess(image, model.input_size)
    heatmap = gradcam_heatmap(model, resized, target)
    overlay = colorize_overlay(heatmap, resized, alpha=args.alpha)
    out = Path(args.out)
    write_png(overlay, out)
    outputs = [out]
    if args.heatmap_csv:
        outputs.append(write_heatmap_csv(heatmap, args.heatmap_csv))
    print(f"overlay written to {out}")
    _run_record(out, "gradcam", args, outputs, started)
    return 0


def cmd_serve(args) -> int:
    import uvicorn

    from .service import build_service

    app = build_service(
        checkpoint=args.checkpoint,
        threshold=args.threshold,
        max_payload_bytes=args.max_payload_mib * 1024 * 1024,
        reference_dir=args.reference_dir,
    )
    uvicorn.run(app, host=args.host, port=args.port, log_level="info")
    return 0


# ---------------------------------------------------------------- parser


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="dermkit",
                                     description="skin-rash triage pipeline")
    parser.add_argument("--version", action="version", version=f"dermkit {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    dataset = sub.add_parser("dataset", help="manifest tooling").add_subparsers(
        dest="subcommand", required=True
    )
    build = dataset.add_parser("build", help="index an image tree (or generate a synthetic one)")
    build.add_argument("--images-root", help="directory with one subfolder per class")
    build.add_argument("--out", required=True, help="manifest CSV to write")
    build.add_argument("--unlabeled", action="store_true")
    build.add_argument("--source", default="", help="provenance string for every record")
    build.add_argument("--synthetic", action="store_true", help="generate the shape corpus")
    build.add_argument("--per-class", type=int, default=50)
    build.add_argument("--count", type=int, default=400, help="records for synthetic --unlabeled")
    build.add_argument("--size", type=int, default=64)
    build.add_argument("--tag-mpox", action="store_true", help="cycle grade/stage tags on Mpox")
    build.add_argument("--seed", type=int, default=0)
    build.set_defaults(func=cmd_dataset_build)

    split = dataset.add_parser("split", help="stratified train/test split")
    split.add_argument("--manifest", required=True)
    split.add_argument("--train-fraction", type=float, default=0.8)
    split.add_argument("--seed", type=int, required=True)
    split.add_argument("--out-train", required=True)
    split.add_argument("--out-test", required=True)
    split.set_defaults(func=cmd_dataset_split)

    stats = dataset.add_parser("stats", help="per-class census")
    stats.add_argument("--manifest", required=True)
    stats.add_argument("--out", help="distribution CSV")
    stats.add_argument("--figure", help="distribution bar chart PNG")
    stats.set_defaults(func=cmd_dataset_stats)

    augment = sub.add_parser("augment", help="augmentation workflows").add_subparsers(
        dest="subcommand", required=True
    )
    expand = augment.add_parser("expand", help="grow scarce classes to target counts")
    expand.add_argument("--manifest", required=True)
    expand.add_argument("--out-dir", required=True)
    expand.add_argument("--out-manifest", required=True)
    expand.add_argument("--targets", help="explicit targets, e.g. 'Mpox=574,Measles=574'")
    expand.add_argument("--total-target", type=int, help="plan targets toward this total")
    expand.add_argument("--scarce", default="Mpox,Chickenpox,Measles,Normal,Urticaria",
                        help="classes eligible for expansion with --total-target")
    expand.add_argument("--config", help="augmentation hyperparameter file")
    expand.add_argument("--per-op-probability", type=float, default=0.5)
    expand.add_argument("--ordered", action="store_true", help="keep the canonical op order")
    expand.add_argument("--seed", type=int, required=True)
    expand.set_defaults(func=cmd_augment_expand)

    pretrain_p = sub.add_parser("pretrain", help="contrastive pretraining")
    pretrain_p.add_argument("--manifest", required=True, help="unlabeled corpus manifest")
    pretrain_p.add_argument("--encoder", default="small")
    pretrain_p.add_argument("--epochs", type=int, default=100)
    pretrain_p.add_argument("--batch-pairs", type=int, default=64)
    pretrain_p.add_argument("--temperature", type=float, default=0.5)
    pretrain_p.add_argument("--lr", type=float, default=0.05)
    pretrain_p.add_argument("--momentum", type=float, default=0.9)
    pretrain_p.add_argument("--no-cosine-decay", action="store_true")
    pretrain_p.add_argument("--projection-dim", type=int, default=128)
    pretrain_p.add_argument("--view-size", type=int, default=224)
    pretrain_p.add_argument("--config", help="augmentation hyperparameter file")
    pretrain_p.add_argument("--no-cache-images", action="store_true")
    pretrain_p.add_argument("--seed", type=int, required=True)
    pretrain_p.add_argument("--out", required=True, help="checkpoint path")
    pretrain_p.set_defaults(func=cmd_pretrain)

    finetune_p = sub.add_parser("finetune", help="supervised training")
    finetune_p.add_argument("--train-manifest", required=True)
    finetune_p.add_argument("--test-manifest", required=True)
    finetune_p.add_argument("--encoder", default="small")
    finetune_p.add_argument("--init", help="warm-start encoder from this checkpoint")
    finetune_p.add_argument("--epochs", type=int, default=30)
    finetune_p.add_argument("--batch-size", type=int, default=32)
    finetune_p.add_argument("--lr", type=float, default=0.01)
    finetune_p.add_argument("--momentum", type=float, default=0.9)
    finetune_p.add_argument("--no-cache-images", action="store_true")
    finetune_p.add_argument("--seed", type=int, required=True)
    finetune_p.add_argument("--out", required=True, help="checkpoint path")
    finetune_p.set_defaults(func=cmd_finetune)

    evaluate_p = sub.add_parser("evaluate", help="five-metric report over a manifest")
    evaluate_p.add_argument("--checkpoint", required=True)
    evaluate_p.add_argument("--manifest", required=True)
    evaluate_p.add_argument("--out", required=True, help="report JSON")
    evaluate_p.add_argument("--csv", help="per-class metrics CSV")
    evaluate_p.add_argument("--figures-dir", help="where figures go (default: next to --out)")
    evaluate_p.set_defaults(func=cmd_evaluate)

    grade = sub.add_parser("grade-eval", help="recall within grade or stage subsets")
    grade.add_argument("--checkpoint", required=True)
    grade.add_argument("--manifest", required=True)
    grade.add_argument("--key", choices=("grade", "stage"), default="grade")
    grade.add_argument("--out", required=True, help="subset report JSON")
    grade.add_argument("--csv")
    grade.set_defaults(func=cmd_grade_eval)

    thresh = sub.add_parser("threshold-report", help="triage coverage/accuracy split")
    thresh.add_argument("--checkpoint", required=True)
    thresh.add_argument("--manifest", required=True)
    thresh.add_argument("--threshold", type=float, default=0.6)
    thresh.add_argument("--out", required=True, help="report JSON")
    thresh.add_argument("--figure", help="per-class top-probability box plot PNG")
    thresh.set_defaults(func=cmd_threshold_report)

    gradcam_p = sub.add_parser("gradcam", help="relevance overlay for one image")
    gradcam_p.add_argument("--checkpoint", required=True)
    gradcam_p.add_argument("--image", required=True)
    gradcam_p.add_argument("--target-class", help="default: the predicted class")
    gradcam_p.add_argument("--alpha", type=float, default=0.45)
    gradcam_p.add_argument("--heatmap-csv", help="raw float grid export")
    gradcam_p.add_argument("--out", required=True, help="overlay PNG")
    gradcam_p.set_defaults(func=cmd_gradcam)

    serve = sub.add_parser("serve", help="run the diagnosis HTTP service")
    serve.add_argument("--checkpoint", required=True)
    serve.add_argument("--host", default="127.0.0.1")
    serve.add_argument("--port", type=int, default=8000)
    serve.add_argument("--threshold", type=float, default=0.6)
    serve.add_argument("--max-payload-mib", type=int, default=10)
    serve.add_argument("--reference-dir", help="curated gallery root, one folder per class")
    serve.set_defaults(func=cmd_serve)

    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except DermkitError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
