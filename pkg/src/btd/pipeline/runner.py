"""End-to-end experiment orchestration: data, preprocessing, CNN training,
head training, evaluation, and report/model persistence.

Per-image cluster preprocessing is content-keyed: the k-means seed for an
image is splitmix64(stream_seed(global_seed, "preprocess") XOR
fnv1a64(pixel bytes)), so an image quantizes identically at train,
evaluation and prediction time regardless of position or batch.
"""

from __future__ import annotations

import json
import time
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .. import metrics as metrics_mod
from ..clustering import kmeans_1d, quantize_image
from ..heads import dt_leaf, dt_predict, extract_features, rbf_predict, train_dt, train_rbf
from ..heads.rbf import RBFModel
from ..heads.tree import DecisionTree
from ..imageio import (
    GrayImage,
    LABELS,
    DatasetManifest,
    generate_synthetic,
    load_manifest,
    load_pgm,
    to_tensor,
    resize_bilinear,
)
from ..nn import layers
from ..nn.network import build_preset, forward_full, init_parameters
from ..nn.training import TrainHistory, evaluate, train
from ..prng import Prng, fnv1a64, splitmix64, stream_seed
from .config import ClusterPreprocess, ExperimentConfig, ManifestSource, SyntheticSource
from .model_io import ModelBundle, save_model


@dataclass
class DataItem:
    image: GrayImage
    label: int  # 0 healthy, 1 tumor
    ident: str


@dataclass
class MethodResult:
    name: str
    confusion: metrics_mod.ConfusionMatrix
    metrics: metrics_mod.MetricsReport
    misclassified: list[str]

    def to_json_obj(self) -> dict:
        return {
            "name": self.name,
            "confusion": self.confusion.to_json_obj(),
            "metrics": self.metrics.to_json_obj(),
            "misclassified": list(self.misclassified),
        }


@dataclass
class Report:
    config: dict
    methods: list[MethodResult]
    history: TrainHistory
    timings_ms: dict[str, float]

    def to_json_obj(self, include_timings: bool = True) -> dict:
        obj = {
            "config": self.config,
            "methods": [m.to_json_obj() for m in self.methods],
            "history": self.history.to_json_obj(),
        }
        if include_timings:
            obj["timings_ms"] = self.timings_ms
        return obj

    def to_json_bytes(self, include_timings: bool = True) -> bytes:
        obj = self.to_json_obj(include_timings)
        return (json.dumps(obj, indent=2, sort_keys=True) + "\n").encode("utf-8")


@dataclass
class RunResult:
    report: Report
    bundle: ModelBundle
    report_path: Path
    model_path: Path


def load_dataset(source, base_dir: Path) -> tuple[list[DataItem], list[DataItem]]:
    """(train items, test items) from a manifest or the synthetic source."""
    if isinstance(source, ManifestSource):
        manifest_path = Path(base_dir) / source.path
        manifest = load_manifest(manifest_path.read_bytes())
        return manifest_items(manifest, manifest_path.parent)
    train: list[DataItem] = []
    test: list[DataItem] = []
    per_class = source.n_per_class + source.test_per_class
    images = generate_synthetic(source.seed, per_class, source.size)
    for label_idx, label in enumerate(LABELS):
        block = images[label_idx * per_class : (label_idx + 1) * per_class]
        for i, (img, lab) in enumerate(block):
            assert lab == label
            item = DataItem(img, label_idx, f"synthetic/{label}/{i:04d}")
            (train if i < source.n_per_class else test).append(item)
    return train, test


def manifest_items(manifest: DatasetManifest, image_root: Path) -> tuple[list[DataItem], list[DataItem]]:
    train: list[DataItem] = []
    test: list[DataItem] = []
    for entry in manifest.entries:
        img = load_pgm((Path(image_root) / entry.path).read_bytes())
        item = DataItem(img, LABELS.index(entry.label), entry.path)
        (train if entry.split == "train" else test).append(item)
    return train, test


def image_cluster_seed(global_seed: int, img: GrayImage) -> int:
    return splitmix64(stream_seed(global_seed, "preprocess") ^ fnv1a64(img.pixels.tobytes()))


def quantize_for_run(img: GrayImage, pre: ClusterPreprocess, global_seed: int) -> GrayImage:
    model = kmeans_1d(
        img.flat, pre.k, image_cluster_seed(global_seed, img), pre.max_iter, pre.tol
    )
    return quantize_image(img, model)


def preprocess_items(items: list[DataItem], pre: ClusterPreprocess | None,
                     global_seed: int) -> list[DataItem]:
    if pre is None:
        return items
    return [
        DataItem(quantize_for_run(it.image, pre, global_seed), it.label, it.ident)
        for it in items
    ]


def items_to_tensors(items: list[DataItem], input_shape) -> list[tuple[np.ndarray, int]]:
    _, h, w = input_shape
    return [
        (to_tensor(resize_bilinear(it.image, w, h)), it.label)
        for it in items
    ]


def _head_predictions(cfg: ExperimentConfig, spec, params, train_tensors, test_tensors):
    """Test-split class predictions plus the serializable head payload."""
    if cfg.head.kind == "softmax":
        preds, _ = evaluate(spec, params, test_tensors)
        return preds, None
    feats_train = np.stack([extract_features(spec, params, x) for x, _ in train_tensors])
    labels_train = np.array([y for _, y in train_tensors])
    feats_test = [extract_features(spec, params, x) for x, _ in test_tensors]
    if cfg.head.kind == "rbf":
        model = train_rbf(
            feats_train,
            labels_train,
            k_per_class=cfg.head.k_per_class,
            ridge=cfg.head.ridge,
            seed=cfg.stage_seed("head"),
        )
        preds = [rbf_predict(model, f)[0] for f in feats_test]
        return preds, model.to_json_obj()
    model = train_dt(
        feats_train,
        labels_train,
        max_depth=cfg.head.max_depth,
        min_samples_split=cfg.head.min_samples_split,
        num_classes=spec.num_classes,
    )
    preds = [dt_predict(model, f) for f in feats_test]
    return preds, model.to_json_obj()


def train_model(cfg: ExperimentConfig, base_dir=".") -> tuple[ModelBundle, TrainHistory, Path]:
    """The CNN stage alone: load, preprocess, train, and write the model
    container (native softmax head, no metric snapshot)."""
    base_dir = Path(base_dir)
    train_items, _ = load_dataset(cfg.data, base_dir)
    train_items = preprocess_items(train_items, cfg.preprocessing, cfg.seed)
    spec = build_preset(cfg.network, num_classes=2)
    tensors = items_to_tensors(train_items, spec.input_shape)
    params = init_parameters(spec, cfg.stage_seed("init"))
    history = train(spec, params, tensors, cfg.train)
    bundle = ModelBundle(
        network=spec,
        params=params,
        preprocessing=cfg.to_json_obj()["preprocessing"],
        head_kind="softmax",
        head_payload=None,
        seed=cfg.seed,
        metrics=None,
    )
    out_dir = base_dir / cfg.output_dir
    out_dir.mkdir(parents=True, exist_ok=True)
    model_path = out_dir / "model.btdm"
    save_model(model_path, bundle)
    return bundle, history, model_path


def run_experiment(cfg: ExperimentConfig, base_dir=".") -> RunResult:
    """Execute the full pipeline for one configuration and write
    report.json plus model.btdm into the output directory."""
    base_dir = Path(base_dir)
    timings: dict[str, float] = {}
    t_start = time.perf_counter()

    t = time.perf_counter()
    train_items, test_items = load_dataset(cfg.data, base_dir)
    timings["load"] = (time.perf_counter() - t) * 1000

    t = time.perf_counter()
    train_items = preprocess_items(train_items, cfg.preprocessing, cfg.seed)
    test_items = preprocess_items(test_items, cfg.preprocessing, cfg.seed)
    timings["preprocess"] = (time.perf_counter() - t) * 1000

    spec = build_preset(cfg.network, num_classes=2)
    train_tensors = items_to_tensors(train_items, spec.input_shape)
    test_tensors = items_to_tensors(test_items, spec.input_shape)

    t = time.perf_counter()
    params = init_parameters(spec, cfg.stage_seed("init"))
    history = train(spec, params, train_tensors, cfg.train)
    timings["train"] = (time.perf_counter() - t) * 1000

    t = time.perf_counter()
    preds, head_payload = _head_predictions(cfg, spec, params, train_tensors, test_tensors)
    timings["head"] = (time.perf_counter() - t) * 1000

    t = time.perf_counter()
    labels = [it.label for it in test_items]
    cm = metrics_mod.confusion(preds, labels)
    report_metrics = metrics_mod.MetricsReport.from_confusion(cm)
    misclassified = [it.ident for it, p in zip(test_items, preds) if p != it.label]
    timings["evaluate"] = (time.perf_counter() - t) * 1000
    timings["total"] = (time.perf_counter() - t_start) * 1000

    method = MethodResult(cfg.method_name(), cm, report_metrics, misclassified)
    report = Report(cfg.to_json_obj(), [method], history, timings)
    bundle = ModelBundle(
        network=spec,
        params=params,
        preprocessing=report.config["preprocessing"],
        head_kind=cfg.head.kind,
        head_payload=head_payload,
        seed=cfg.seed,
        metrics=report_metrics.to_json_obj(),
    )

    out_dir = base_dir / cfg.output_dir
    out_dir.mkdir(parents=True, exist_ok=True)
    report_path = out_dir / "report.json"
    model_path = out_dir / "model.btdm"
    report_path.write_bytes(report.to_json_bytes())
    save_model(model_path, bundle)
    return RunResult(report, bundle, report_path, model_path)


def _bundle_preprocess(bundle: ModelBundle) -> ClusterPreprocess | None:
    pre = bundle.preprocessing
    if not pre or pre.get("kind") == "none":
        return None
    return ClusterPreprocess(
        k=int(pre["k"]), max_iter=int(pre["max_iter"]), tol=float(pre["tol"])
    )


def predict_item(bundle: ModelBundle, img: GrayImage) -> tuple[int, list[float]]:
    """(class index, per-class scores) for one image, replaying the stored
    preprocessing."""
    pre = _bundle_preprocess(bundle)
    if pre is not None:
        img = quantize_for_run(img, pre, bundle.seed)
    _, h, w = bundle.network.input_shape
    x = to_tensor(resize_bilinear(img, w, h))
    if bundle.head_kind == "softmax":
        logits, _ = forward_full(bundle.network, bundle.params, x)
        probs = layers.softmax(logits)
        return int(np.argmax(probs)), [float(v) for v in probs]
    feats = extract_features(bundle.network, bundle.params, x)
    if bundle.head_kind == "rbf":
        model = RBFModel.from_json_obj(bundle.head_payload)
        cls, scores = rbf_predict(model, feats)
        return cls, [float(v) for v in scores]
    model = DecisionTree.from_json_obj(bundle.head_payload)
    leaf = dt_leaf(model, feats)
    total = sum(leaf.counts) or 1
    return leaf.klass, [c / total for c in leaf.counts]


def evaluate_bundle(bundle: ModelBundle, items: list[DataItem]) -> MethodResult:
    """Confusion and metrics of a stored model over data items."""
    preds = [predict_item(bundle, it.image)[0] for it in items]
    labels = [it.label for it in items]
    cm = metrics_mod.confusion(preds, labels)
    name = ("CNN" if bundle.preprocessing.get("kind", "none") == "none" else "Clustering+CNN")
    name += "+" + {"softmax": "SoftMax", "rbf": "RBF", "dt": "DT"}[bundle.head_kind]
    return MethodResult(
        name,
        cm,
        metrics_mod.MetricsReport.from_confusion(cm),
        [it.ident for it, p in zip(items, preds) if p != it.label],
    )
