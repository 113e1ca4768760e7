from .config import (
    ClusterPreprocess,
    ConfigError,
    DtHead,
    ExperimentConfig,
    ManifestSource,
    RbfHead,
    SoftmaxHead,
    SyntheticSource,
    load_config,
    parse_config,
)
from .model_io import (
    BadMagicError,
    HeaderParseError,
    LengthMismatchError,
    ModelBundle,
    ModelFormatError,
    UnknownVersionError,
    decode_model,
    encode_model,
    load_model,
    save_model,
)
from .runner import (
    DataItem,
    MethodResult,
    Report,
    RunResult,
    evaluate_bundle,
    load_dataset,
    predict_item,
    run_experiment,
    train_model,
)

__all__ = [
    "BadMagicError",
    "ClusterPreprocess",
    "ConfigError",
    "DataItem",
    "DtHead",
    "ExperimentConfig",
    "HeaderParseError",
    "LengthMismatchError",
    "ManifestSource",
    "MethodResult",
    "ModelBundle",
    "ModelFormatError",
    "RbfHead",
    "Report",
    "RunResult",
    "SoftmaxHead",
    "SyntheticSource",
    "UnknownVersionError",
    "decode_model",
    "encode_model",
    "evaluate_bundle",
    "load_config",
    "load_dataset",
    "load_model",
    "parse_config",
    "predict_item",
    "run_experiment",
    "save_model",
    "train_model",
]
