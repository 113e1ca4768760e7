"""Experiment configuration: JSON schema parsing, validation and the
canonical echo embedded in reports.

Schema (defaults shown where a key may be omitted):

    {
      "seed": 0,
      "data": {"manifest": "path.json"}
              | {"synthetic": {"seed": 0, "n_per_class": 50, "size": 64,
                               "test_per_class": <round-half-up of 0.3*n>}},
      "preprocessing": {"kind": "none"}
                       | {"kind": "cluster", "k": 4, "max_iter": 100, "tol": 1e-4},
      "network": "tiny-32" | "alexnet-227",
      "train": {"learning_rate": 0.01, "momentum": 0.9, "weight_decay": 5e-4,
                "batch_size": 10, "epochs": 10, "seed": <derived from global>},
      "head": {"kind": "softmax"}
              | {"kind": "rbf", "k_per_class": 4, "ridge": 1e-6}
              | {"kind": "dt", "max_depth": 12, "min_samples_split": 2},
      "output_dir": "out"
    }

The synthetic block generates n_per_class training and test_per_class test
images per class. Relative paths are resolved against the config file's
directory at run time; the echo keeps them as written.
"""

from __future__ import annotations

import json
from dataclasses import dataclass

from ..nn.network import PRESETS
from ..nn.training import TrainConfig
from ..prng import stream_seed


class ConfigError(ValueError):
    pass


@dataclass(frozen=True)
class ManifestSource:
    path: str


@dataclass(frozen=True)
class SyntheticSource:
    seed: int
    n_per_class: int
    size: int
    test_per_class: int


@dataclass(frozen=True)
class ClusterPreprocess:
    k: int = 4
    max_iter: int = 100
    tol: float = 1e-4


@dataclass(frozen=True)
class SoftmaxHead:
    kind: str = "softmax"


@dataclass(frozen=True)
class RbfHead:
    k_per_class: int = 4
    ridge: float = 1e-6
    kind: str = "rbf"


@dataclass(frozen=True)
class DtHead:
    max_depth: int = 12
    min_samples_split: int = 2
    kind: str = "dt"


HeadConfig = SoftmaxHead | RbfHead | DtHead


@dataclass(frozen=True)
class ExperimentConfig:
    seed: int
    data: ManifestSource | SyntheticSource
    preprocessing: ClusterPreprocess | None
    network: str
    train: TrainConfig
    head: HeadConfig
    output_dir: str

    def stage_seed(self, stage: str) -> int:
        return stream_seed(self.seed, stage)

    def method_name(self) -> str:
        base = "CNN" if self.preprocessing is None else "Clustering+CNN"
        suffix = {"softmax": "SoftMax", "rbf": "RBF", "dt": "DT"}[self.head.kind]
        return f"{base}+{suffix}"

    def to_json_obj(self) -> dict:
        if isinstance(self.data, ManifestSource):
            data = {"manifest": self.data.path}
        else:
            data = {
                "synthetic": {
                    "seed": self.data.seed,
                    "n_per_class": self.data.n_per_class,
                    "size": self.data.size,
                    "test_per_class": self.data.test_per_class,
                }
            }
        if self.preprocessing is None:
            pre = {"kind": "none"}
        else:
            pre = {
                "kind": "cluster",
                "k": self.preprocessing.k,
                "max_iter": self.preprocessing.max_iter,
                "tol": self.preprocessing.tol,
            }
        head: dict = {"kind": self.head.kind}
        if isinstance(self.head, RbfHead):
            head.update(k_per_class=self.head.k_per_class, ridge=self.head.ridge)
        elif isinstance(self.head, DtHead):
            head.update(max_depth=self.head.max_depth, min_samples_split=self.head.min_samples_split)
        return {
            "seed": self.seed,
            "data": data,
            "preprocessing": pre,
            "network": self.network,
            "train": {
                "learning_rate": self.train.learning_rate,
                "momentum": self.train.momentum,
                "weight_decay": self.train.weight_decay,
                "batch_size": self.train.batch_size,
                "epochs": self.train.epochs,
                "seed": self.train.seed,
            },
            "head": head,
            "output_dir": self.output_dir,
        }


def _require(obj: dict, key: str, ctx: str):
    if key not in obj:
        raise ConfigError(f"{ctx}: missing key {key!r}")
    return obj[key]


def _opt_int(obj: dict, key: str, default: int, ctx: str) -> int:
    value = obj.get(key, default)
    if not isinstance(value, int) or isinstance(value, bool):
        raise ConfigError(f"{ctx}: {key} must be an integer")
    return value


def _opt_num(obj: dict, key: str, default: float, ctx: str) -> float:
    value = obj.get(key, default)
    if not isinstance(value, (int, float)) or isinstance(value, bool):
        raise ConfigError(f"{ctx}: {key} must be a number")
    return float(value)


def default_test_per_class(n_per_class: int) -> int:
    """Round-half-up of 0.3 * n_per_class, at least 1."""
    return max(1, (3 * n_per_class + 5) // 10)


def _parse_data(obj, seed: int) -> ManifestSource | SyntheticSource:
    if not isinstance(obj, dict) or len(obj) != 1:
        raise ConfigError("data must be {'manifest': ...} or {'synthetic': {...}}")
    if "manifest" in obj:
        path = obj["manifest"]
        if not isinstance(path, str):
            raise ConfigError("data.manifest must be a path string")
        return ManifestSource(path)
    if "synthetic" in obj:
        block = obj["synthetic"]
        if not isinstance(block, dict):
            raise ConfigError("data.synthetic must be an object")
        n = _opt_int(block, "n_per_class", 50, "data.synthetic")
        if n < 1:
            raise ConfigError("data.synthetic: n_per_class must be >= 1")
        size = _opt_int(block, "size", 64, "data.synthetic")
        if size < 16:
            raise ConfigError("data.synthetic: size must be >= 16")
        return SyntheticSource(
            seed=_opt_int(block, "seed", seed, "data.synthetic"),
            n_per_class=n,
            size=size,
            test_per_class=_opt_int(
                block, "test_per_class", default_test_per_class(n), "data.synthetic"
            ),
        )
    raise ConfigError("data must contain exactly one of 'manifest' or 'synthetic'")


def _parse_preprocessing(obj) -> ClusterPreprocess | None:
    if obj is None:
        return None
    if not isinstance(obj, dict):
        raise ConfigError("preprocessing must be an object")
    kind = obj.get("kind", "none")
    if kind == "none":
        return None
    if kind != "cluster":
        raise ConfigError(f"unknown preprocessing kind {kind!r}")
    k = _opt_int(obj, "k", 4, "preprocessing")
    if k < 1:
        raise ConfigError("preprocessing: k must be >= 1")
    return ClusterPreprocess(
        k=k,
        max_iter=_opt_int(obj, "max_iter", 100, "preprocessing"),
        tol=_opt_num(obj, "tol", 1e-4, "preprocessing"),
    )


def _parse_head(obj) -> HeadConfig:
    if obj is None:
        return SoftmaxHead()
    if not isinstance(obj, dict):
        raise ConfigError("head must be an object")
    kind = obj.get("kind", "softmax")
    if kind == "softmax":
        return SoftmaxHead()
    if kind == "rbf":
        return RbfHead(
            k_per_class=_opt_int(obj, "k_per_class", 4, "head"),
            ridge=_opt_num(obj, "ridge", 1e-6, "head"),
        )
    if kind == "dt":
        return DtHead(
            max_depth=_opt_int(obj, "max_depth", 12, "head"),
            min_samples_split=_opt_int(obj, "min_samples_split", 2, "head"),
        )
    raise ConfigError(f"unknown head kind {kind!r}")


def parse_config(obj: dict, seed_override: int | None = None) -> ExperimentConfig:
    if not isinstance(obj, dict):
        raise ConfigError("config must be a JSON object")
    seed = _opt_int(obj, "seed", 0, "config")
    if seed_override is not None:
        seed = seed_override
    train_obj = obj.get("train", {})
    if not isinstance(train_obj, dict):
        raise ConfigError("train must be an object")
    try:
        train = TrainConfig(
            learning_rate=_opt_num(train_obj, "learning_rate", 0.01, "train"),
            momentum=_opt_num(train_obj, "momentum", 0.9, "train"),
            weight_decay=_opt_num(train_obj, "weight_decay", 5e-4, "train"),
            batch_size=_opt_int(train_obj, "batch_size", 10, "train"),
            epochs=_opt_int(train_obj, "epochs", 10, "train"),
            seed=_opt_int(train_obj, "seed", stream_seed(seed, "train"), "train"),
        )
    except ValueError as exc:
        raise ConfigError(f"train: {exc}") from exc
    network = obj.get("network", "tiny-32")
    if network not in PRESETS:
        raise ConfigError(f"unknown network preset {network!r}")
    output_dir = obj.get("output_dir", "out")
    if not isinstance(output_dir, str):
        raise ConfigError("output_dir must be a string")
    return ExperimentConfig(
        seed=seed,
        data=_parse_data(_require(obj, "data", "config"), seed),
        preprocessing=_parse_preprocessing(obj.get("preprocessing")),
        network=network,
        train=train,
        head=_parse_head(obj.get("head")),
        output_dir=output_dir,
    )


def load_config(path, seed_override: int | None = None) -> ExperimentConfig:
    try:
        with open(path, "rb") as fh:
            obj = json.load(fh)
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise ConfigError(f"config {path} is not valid JSON: {exc}") from exc
    return parse_config(obj, seed_override)
