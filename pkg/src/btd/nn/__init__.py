from .gradcheck import GradCheckReport, grad_check
from .layers import (
    conv2d_backward,
    conv2d_forward,
    cross_entropy,
    fc_backward,
    fc_forward,
    lrn_backward,
    lrn_forward,
    maxpool_backward,
    maxpool_forward,
    relu_backward,
    relu_forward,
    softmax,
    softmax_cross_entropy_grad,
)
from .network import (
    PRESETS,
    Conv,
    Flatten,
    FullyConnected,
    LayerParams,
    LRN,
    MaxPool,
    NetworkSpec,
    Parameters,
    ReLU,
    SpecError,
    backward,
    build_preset,
    forward,
    forward_full,
    init_parameters,
    layer_label,
)
from .training import (
    DivergenceError,
    EpochStats,
    TrainConfig,
    TrainHistory,
    evaluate,
    item_loss_and_grads,
    train,
    train_step,
)

__all__ = [
    "PRESETS",
    "Conv",
    "DivergenceError",
    "EpochStats",
    "Flatten",
    "FullyConnected",
    "GradCheckReport",
    "LRN",
    "LayerParams",
    "MaxPool",
    "NetworkSpec",
    "Parameters",
    "ReLU",
    "SpecError",
    "TrainConfig",
    "TrainHistory",
    "backward",
    "build_preset",
    "conv2d_backward",
    "conv2d_forward",
    "cross_entropy",
    "evaluate",
    "fc_backward",
    "fc_forward",
    "forward",
    "forward_full",
    "grad_check",
    "init_parameters",
    "item_loss_and_grads",
    "layer_label",
    "lrn_backward",
    "lrn_forward",
    "maxpool_backward",
    "maxpool_forward",
    "relu_backward",
    "relu_forward",
    "softmax",
    "softmax_cross_entropy_grad",
    "train",
    "train_step",
]
