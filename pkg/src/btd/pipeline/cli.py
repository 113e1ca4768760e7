"""Command-line interface.

Exit codes: 0 success, 1 validation/usage error, 2 runtime or divergence
error (including a failed gradient check).
"""

from __future__ import annotations

import argparse
import json
import sys
from fractions import Fraction
from pathlib import Path

import numpy as np

from .. import metrics as metrics_mod
from ..clustering import ClusteringError
from ..heads import extract_features, train_dt, train_rbf
from ..imageio import (
    ImageFormatError,
    LABELS,
    DatasetManifest,
    ManifestEntry,
    ManifestError,
    generate_synthetic,
    load_manifest,
    load_pgm,
    save_manifest,
    save_pgm,
)
from ..nn.gradcheck import grad_check
from ..nn.network import PRESETS, SpecError, build_preset, init_parameters
from ..nn.training import DivergenceError
from ..prng import Prng
from .config import (
    ClusterPreprocess,
    ConfigError,
    DtHead,
    RbfHead,
    default_test_per_class,
    load_config,
)
from .model_io import ModelFormatError, load_model, save_model
from .runner import (
    evaluate_bundle,
    items_to_tensors,
    load_dataset,
    manifest_items,
    predict_item,
    preprocess_items,
    quantize_for_run,
    run_experiment,
    train_model,
)


class CliUsageError(ValueError):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        raise CliUsageError(message)


def _build_parser() -> _Parser:
    parser = _Parser(prog="btd", description="Brain-tumor detection pipeline")
    parser.add_argument("--seed", dest="global_seed", type=int, default=None,
                        help="override the config's global seed")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("synth", help="write a synthetic PGM corpus plus manifest")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--n-per-class", type=int, required=True,
                   help="training images per class")
    p.add_argument("--test-per-class", type=int, default=None,
                   help="test images per class (default: round(0.3*n))")
    p.add_argument("--size", type=int, default=64)
    p.add_argument("--out", required=True)

    p = sub.add_parser("preprocess", help="write cluster-quantized copies of a corpus")
    p.add_argument("--k", type=int, default=4)
    p.add_argument("--max-iter", type=int, default=100)
    p.add_argument("--tol", type=float, default=1e-4)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--in", dest="manifest", required=True, help="manifest path")
    p.add_argument("--out", required=True)

    p = sub.add_parser("train", help="train the CNN stage and write the model")
    p.add_argument("--config", required=True)

    p = sub.add_parser("head", help="classifier-head operations")
    head_sub = p.add_subparsers(dest="head_command", required=True)
    ht = head_sub.add_parser("train", help="fit a head on a trained model's features")
    ht.add_argument("--kind", choices=("softmax", "rbf", "dt"), required=True)
    ht.add_argument("--model", required=True)
    ht.add_argument("--config", required=True)

    p = sub.add_parser("eval", help="evaluate a model on a manifest's test split")
    p.add_argument("--model", required=True)
    p.add_argument("--manifest", required=True)
    p.add_argument("--out", required=True)

    p = sub.add_parser("run", help="full experiment from a config file")
    p.add_argument("--config", required=True)

    p = sub.add_parser("predict", help="classify one PGM image")
    p.add_argument("--model", required=True)
    p.add_argument("--image", required=True)

    p = sub.add_parser("gradcheck", help="finite-difference gradient verification")
    p.add_argument("--preset", choices=PRESETS, default="tiny-32")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--eps", type=float, default=1e-5)
    p.add_argument("--tolerance", type=float, default=1e-4)
    p.add_argument("--samples", type=int, default=16)

    p = sub.add_parser("report", help="report operations")
    rep_sub = p.add_subparsers(dest="report_command", required=True)
    rc = rep_sub.add_parser("compare", help="merge report files into a comparison table")
    rc.add_argument("reports", nargs="+")
    rc.add_argument("--csv", action="store_true", help="emit CSV instead of JSON")
    return parser


def _cmd_synth(args) -> int:
    n_test = args.test_per_class
    if n_test is None:
        n_test = default_test_per_class(args.n_per_class)
    per_class = args.n_per_class + n_test
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    images = generate_synthetic(args.seed, per_class, args.size)
    entries = []
    for label_idx, label in enumerate(LABELS):
        block = images[label_idx * per_class : (label_idx + 1) * per_class]
        for i, (img, _) in enumerate(block):
            name = f"{label}_{i:04d}.pgm"
            (out / name).write_bytes(save_pgm(img))
            split = "train" if i < args.n_per_class else "test"
            entries.append(ManifestEntry(name, label, split))
    (out / "manifest.json").write_bytes(save_manifest(DatasetManifest(tuple(entries))))
    print(f"wrote {len(entries)} images and manifest.json to {out}")
    return 0


def _cmd_preprocess(args) -> int:
    manifest_path = Path(args.manifest)
    manifest = load_manifest(manifest_path.read_bytes())
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    pre = ClusterPreprocess(k=args.k, max_iter=args.max_iter, tol=args.tol)
    for entry in manifest.entries:
        img = load_pgm((manifest_path.parent / entry.path).read_bytes())
        quantized = quantize_for_run(img, pre, args.seed)
        target = out / entry.path
        target.parent.mkdir(parents=True, exist_ok=True)
        target.write_bytes(save_pgm(quantized))
    (out / "manifest.json").write_bytes(save_manifest(manifest))
    print(f"quantized {len(manifest.entries)} images into {out}")
    return 0


def _cmd_train(args) -> int:
    cfg = load_config(args.config, args.global_seed)
    _, history, model_path = train_model(cfg, Path(args.config).parent)
    last = history.epochs[-1]
    print(f"trained {cfg.network}: epoch {last.epoch} loss {last.mean_loss:.4f} "
          f"accuracy {last.accuracy:.4f}")
    print(f"model written to {model_path}")
    return 0


def _bundle_preprocess_cfg(obj) -> ClusterPreprocess | None:
    if not obj or obj.get("kind") == "none":
        return None
    return ClusterPreprocess(k=int(obj["k"]), max_iter=int(obj["max_iter"]), tol=float(obj["tol"]))


def _cmd_head_train(args) -> int:
    cfg = load_config(args.config, args.global_seed)
    bundle = load_model(args.model)
    if args.kind == "softmax":
        bundle.head_kind, bundle.head_payload = "softmax", None
    else:
        train_items, _ = load_dataset(cfg.data, Path(args.config).parent)
        train_items = preprocess_items(
            train_items, _bundle_preprocess_cfg(bundle.preprocessing), bundle.seed
        )
        tensors = items_to_tensors(train_items, bundle.network.input_shape)
        feats = np.stack(
            [extract_features(bundle.network, bundle.params, x) for x, _ in tensors]
        )
        labels = np.array([y for _, y in tensors])
        if args.kind == "rbf":
            head = cfg.head if isinstance(cfg.head, RbfHead) else RbfHead()
            model = train_rbf(feats, labels, k_per_class=head.k_per_class,
                              ridge=head.ridge, seed=cfg.stage_seed("head"))
        else:
            head = cfg.head if isinstance(cfg.head, DtHead) else DtHead()
            model = train_dt(feats, labels, max_depth=head.max_depth,
                             min_samples_split=head.min_samples_split,
                             num_classes=bundle.network.num_classes)
        bundle.head_kind, bundle.head_payload = args.kind, model.to_json_obj()
    bundle.metrics = None
    save_model(args.model, bundle)
    print(f"attached {args.kind} head to {args.model}")
    return 0


def _cmd_eval(args) -> int:
    bundle = load_model(args.model)
    manifest_path = Path(args.manifest)
    manifest = load_manifest(manifest_path.read_bytes())
    _, test_items = manifest_items(manifest, manifest_path.parent)
    if not test_items:
        raise ManifestError("manifest has no test entries")
    method = evaluate_bundle(bundle, test_items)
    report_obj = {
        "config": {"model": args.model, "manifest": args.manifest},
        "methods": [method.to_json_obj()],
        "history": [],
        "timings_ms": {},
    }
    Path(args.out).write_text(json.dumps(report_obj, indent=2, sort_keys=True) + "\n")
    print(f"evaluated {len(test_items)} test images; report written to {args.out}")
    return 0


def _cmd_run(args) -> int:
    cfg = load_config(args.config, args.global_seed)
    result = run_experiment(cfg, Path(args.config).parent)
    method = result.report.methods[0]
    parts = []
    for col in metrics_mod.METRIC_COLUMNS:
        parts.append(f"{col} {metrics_mod.percent_str(getattr(method.metrics, col))}%")
    print(f"{method.name}: " + ", ".join(parts))
    print(f"report: {result.report_path}\nmodel:  {result.model_path}")
    return 0


def _cmd_predict(args) -> int:
    bundle = load_model(args.model)
    img = load_pgm(Path(args.image).read_bytes())
    cls, scores = predict_item(bundle, img)
    print(json.dumps({"label": LABELS[cls], "scores": scores}))
    return 0


def _cmd_gradcheck(args) -> int:
    spec = build_preset(args.preset, num_classes=2)
    params = init_parameters(spec, args.seed)
    rng = Prng.for_stream(args.seed, "gradcheck-input")
    c, h, w = spec.input_shape
    x = rng.normals(c * h * w).reshape(c, h, w)
    label = rng.below(spec.num_classes)
    report = grad_check(spec, params, x, label, eps=args.eps,
                        tolerance=args.tolerance, samples_per_tensor=args.samples,
                        seed=args.seed)
    for line in report.format_lines():
        print(line)
    return 0 if report.passed else 2


def _cmd_report_compare(args) -> int:
    named = []
    for path in args.reports:
        with open(path, "rb") as fh:
            obj = json.load(fh)
        for method in obj.get("methods", []):
            report = metrics_mod.MetricsReport(
                **{
                    key: (None if value is None else Fraction(value))
                    for key, value in method["metrics"].items()
                }
            )
            named.append((method["name"], report))
    table = metrics_mod.compare(named)
    sys.stdout.write(table.to_csv() if args.csv else table.to_json())
    return 0


_VALIDATION_ERRORS = (
    CliUsageError,
    ConfigError,
    ManifestError,
    ImageFormatError,
    ModelFormatError,
    ClusteringError,
    SpecError,
    metrics_mod.MetricsError,
    ValueError,
)

_COMMANDS = {
    "synth": _cmd_synth,
    "preprocess": _cmd_preprocess,
    "train": _cmd_train,
    "head": _cmd_head_train,
    "eval": _cmd_eval,
    "run": _cmd_run,
    "predict": _cmd_predict,
    "gradcheck": _cmd_gradcheck,
    "report": _cmd_report_compare,
}


def main(argv=None) -> int:
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
        return _COMMANDS[args.command](args)
    except _VALIDATION_ERRORS as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except FileNotFoundError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except DivergenceError as exc:
        print(f"divergence: {exc}", file=sys.stderr)
        return 2
    except Exception as exc:  # runtime failures
        print(f"runtime error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
