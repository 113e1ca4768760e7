"""Declarative network specs, the two presets, parameter initialization and
the full forward/backward pass over a layer stack."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from ..prng import Prng
from . import layers


@dataclass(frozen=True)
class Conv:
    out_channels: int
    kernel_h: int
    kernel_w: int
    stride: int = 1
    pad: int = 0


@dataclass(frozen=True)
class ReLU:
    pass


@dataclass(frozen=True)
class LRN:
    n: int = 5
    k: float = 2.0
    alpha: float = 1e-4
    beta: float = 0.75


@dataclass(frozen=True)
class MaxPool:
    size: int
    stride: int


@dataclass(frozen=True)
class Flatten:
    pass


@dataclass(frozen=True)
class FullyConnected:
    out_features: int


LayerSpec = Conv | ReLU | LRN | MaxPool | Flatten | FullyConnected

_LAYER_TAGS = {
    Conv: "conv",
    ReLU: "relu",
    LRN: "lrn",
    MaxPool: "maxpool",
    Flatten: "flatten",
    FullyConnected: "fc",
}
_TAG_CLASSES = {v: k for k, v in _LAYER_TAGS.items()}


class SpecError(ValueError):
    pass


@dataclass(frozen=True)
class NetworkSpec:
    input_shape: tuple[int, int, int]
    layers: tuple[LayerSpec, ...]
    num_classes: int
    preset_name: str | None = None

    def __post_init__(self):
        self.shapes()  # validates the chain

    def shapes(self) -> list[tuple[int, ...]]:
        """Output shape of every layer; raises SpecError on an invalid
        chain."""
        if self.num_classes < 2:
            raise SpecError("num_classes must be >= 2")
        shape: tuple[int, ...] = tuple(self.input_shape)
        if len(shape) != 3 or min(shape) < 1:
            raise SpecError(f"input shape must be [channels, h, w], got {shape}")
        out = []
        for i, layer in enumerate(self.layers):
            shape = self._infer(i, layer, shape)
            out.append(shape)
        if not self.layers or not isinstance(self.layers[-1], FullyConnected):
            raise SpecError("final layer must be fully connected")
        if shape != (self.num_classes,):
            raise SpecError(f"final layer emits {shape}, expected ({self.num_classes},)")
        return out

    def _infer(self, i: int, layer: LayerSpec, shape: tuple[int, ...]) -> tuple[int, ...]:
        if isinstance(layer, Conv):
            if len(shape) != 3:
                raise SpecError(f"layer {i}: conv needs a [c,h,w] input, got {shape}")
            if min(layer.out_channels, layer.kernel_h, layer.kernel_w, layer.stride) < 1:
                raise SpecError(f"layer {i}: conv sizes must be >= 1")
            if layer.pad < 0:
                raise SpecError(f"layer {i}: pad must be >= 0")
            oh, ow = layers.conv2d_output_shape(
                shape[1], shape[2], layer.kernel_h, layer.kernel_w, layer.stride, layer.pad
            )
            return (layer.out_channels, oh, ow)
        if isinstance(layer, (ReLU,)):
            return shape
        if isinstance(layer, LRN):
            if len(shape) != 3:
                raise SpecError(f"layer {i}: LRN needs a [c,h,w] input, got {shape}")
            if layer.n < 1 or layer.n % 2 == 0:
                raise SpecError(f"layer {i}: LRN n must be odd and >= 1")
            if layer.k <= 0 or layer.alpha < 0 or layer.beta <= 0:
                raise SpecError(f"layer {i}: LRN constants out of range")
            return shape
        if isinstance(layer, MaxPool):
            if len(shape) != 3:
                raise SpecError(f"layer {i}: pool needs a [c,h,w] input, got {shape}")
            if layer.size < 1 or layer.stride < 1:
                raise SpecError(f"layer {i}: pool size/stride must be >= 1")
            if shape[1] < layer.size or shape[2] < layer.size:
                raise SpecError(f"layer {i}: pool window {layer.size} larger than {shape}")
            oh = (shape[1] - layer.size) // layer.stride + 1
            ow = (shape[2] - layer.size) // layer.stride + 1
            return (shape[0], oh, ow)
        if isinstance(layer, Flatten):
            return (int(np.prod(shape)),)
        if isinstance(layer, FullyConnected):
            if len(shape) != 1:
                raise SpecError(f"layer {i}: fc needs a flat input, got {shape}")
            if layer.out_features < 1:
                raise SpecError(f"layer {i}: fc width must be >= 1")
            return (layer.out_features,)
        raise SpecError(f"layer {i}: unknown layer {layer!r}")

    def to_json_obj(self) -> dict:
        spec_layers = []
        for layer in self.layers:
            obj = {"type": _LAYER_TAGS[type(layer)]}
            obj.update(vars(layer))
            spec_layers.append(obj)
        return {
            "input_shape": list(self.input_shape),
            "layers": spec_layers,
            "num_classes": self.num_classes,
            "preset_name": self.preset_name,
        }

    @classmethod
    def from_json_obj(cls, obj: dict) -> "NetworkSpec":
        built = []
        for entry in obj["layers"]:
            entry = dict(entry)
            tag = entry.pop("type")
            if tag not in _TAG_CLASSES:
                raise SpecError(f"unknown layer type {tag!r}")
            built.append(_TAG_CLASSES[tag](**entry))
        return cls(
            input_shape=tuple(obj["input_shape"]),
            layers=tuple(built),
            num_classes=int(obj["num_classes"]),
            preset_name=obj.get("preset_name"),
        )


PRESETS = ("alexnet-227", "tiny-32")


def build_preset(name: str, num_classes: int) -> NetworkSpec:
    """The full-scale AlexNet-shaped stack, or its desk-scale analogue."""
    if name == "alexnet-227":
        stack = (
            Conv(96, 11, 11, stride=4, pad=0), ReLU(), LRN(), MaxPool(3, 2),
            Conv(256, 5, 5, stride=1, pad=2), ReLU(), LRN(), MaxPool(3, 2),
            Conv(384, 3, 3, stride=1, pad=1), ReLU(),
            Conv(384, 3, 3, stride=1, pad=1), ReLU(),
            Conv(256, 3, 3, stride=1, pad=1), ReLU(), MaxPool(3, 2),
            Flatten(),
            FullyConnected(4096), ReLU(),
            FullyConnected(4096), ReLU(),
            FullyConnected(num_classes),
        )
        spec = NetworkSpec((1, 227, 227), stack, num_classes, "alexnet-227")
        flat = spec.shapes()[stack.index(Flatten())]
        assert flat == (256 * 6 * 6,), flat
        return spec
    if name == "tiny-32":
        stack = (
            Conv(8, 3, 3, stride=1, pad=1), ReLU(), LRN(), MaxPool(2, 2),
            Conv(16, 3, 3, stride=1, pad=1), ReLU(), LRN(), MaxPool(2, 2),
            Conv(16, 3, 3, stride=1, pad=1), ReLU(),
            Conv(16, 3, 3, stride=1, pad=1), ReLU(),
            Conv(16, 3, 3, stride=1, pad=1), ReLU(), MaxPool(2, 2),
            Flatten(),
            FullyConnected(64), ReLU(),
            FullyConnected(64), ReLU(),
            FullyConnected(num_classes),
        )
        return NetworkSpec((1, 32, 32), stack, num_classes, "tiny-32")
    raise SpecError(f"unknown preset {name!r}")


@dataclass
class LayerParams:
    weights: np.ndarray
    bias: np.ndarray


@dataclass
class Parameters:
    """Weights and biases aligned with the spec's layer indices; entries are
    None for parameterless layers."""

    values: list[LayerParams | None] = field(default_factory=list)

    def tensors(self):
        for i, p in enumerate(self.values):
            if p is not None:
                yield i, "weights", p.weights
                yield i, "bias", p.bias

    def zeros_like(self) -> "Parameters":
        return Parameters(
            [
                None if p is None else LayerParams(np.zeros_like(p.weights), np.zeros_like(p.bias))
                for p in self.values
            ]
        )

    def copy(self) -> "Parameters":
        return Parameters(
            [
                None if p is None else LayerParams(p.weights.copy(), p.bias.copy())
                for p in self.values
            ]
        )

    def count(self) -> int:
        return sum(t.size for _, _, t in self.tensors())


def init_parameters(spec: NetworkSpec, seed: int) -> Parameters:
    """He-style initialization: weights ~ Normal(0, sqrt(2/fan_in)) from the
    artifact PRNG stream "init", biases zero."""
    rng = Prng.for_stream(seed, "init")
    shape = tuple(spec.input_shape)
    out: list[LayerParams | None] = []
    for layer, out_shape in zip(spec.layers, spec.shapes()):
        if isinstance(layer, Conv):
            fan_in = shape[0] * layer.kernel_h * layer.kernel_w
            wshape = (layer.out_channels, shape[0], layer.kernel_h, layer.kernel_w)
        elif isinstance(layer, FullyConnected):
            fan_in = shape[0]
            wshape = (layer.out_features, shape[0])
        else:
            out.append(None)
            shape = out_shape
            continue
        std = np.sqrt(2.0 / fan_in)
        weights = rng.normals(int(np.prod(wshape))).reshape(wshape) * std
        out.append(LayerParams(weights, np.zeros(wshape[0])))
        shape = out_shape
    return Parameters(out)


def forward_full(spec: NetworkSpec, params: Parameters, x: np.ndarray):
    """Forward pass keeping per-layer caches for backward; returns
    (logits, caches)."""
    if tuple(x.shape) != tuple(spec.input_shape):
        raise ValueError(f"input shape {x.shape} != spec {spec.input_shape}")
    caches: list[tuple] = []
    for i, layer in enumerate(spec.layers):
        p = params.values[i]
        if isinstance(layer, Conv):
            caches.append((x,))
            x = layers.conv2d_forward(x, p.weights, p.bias, layer.stride, layer.pad)
        elif isinstance(layer, ReLU):
            caches.append((x,))
            x = layers.relu_forward(x)
        elif isinstance(layer, LRN):
            out, scale = layers.lrn_forward(x, layer.n, layer.k, layer.alpha, layer.beta)
            caches.append((x, scale))
            x = out
        elif isinstance(layer, MaxPool):
            out, arg = layers.maxpool_forward(x, layer.size, layer.stride)
            caches.append((arg, x.shape[1], x.shape[2]))
            x = out
        elif isinstance(layer, Flatten):
            caches.append((x.shape,))
            x = x.reshape(-1)
        elif isinstance(layer, FullyConnected):
            caches.append((x,))
            x = layers.fc_forward(x, p.weights, p.bias)
    return x, caches


def forward(spec: NetworkSpec, params: Parameters, x: np.ndarray) -> np.ndarray:
    """Logits for one input tensor."""
    return forward_full(spec, params, x)[0]


def backward(spec: NetworkSpec, params: Parameters, caches: list[tuple],
             grad_logits: np.ndarray):
    """Backward pass from the logits gradient; returns (per-layer parameter
    gradients, gradient w.r.t. the network input)."""
    grads = params.zeros_like()
    g = grad_logits
    for i in range(len(spec.layers) - 1, -1, -1):
        layer = spec.layers[i]
        cache = caches[i]
        if isinstance(layer, Conv):
            p = params.values[i]
            g, gw, gb = layers.conv2d_backward(g, cache[0], p.weights, layer.stride, layer.pad)
            grads.values[i].weights += gw
            grads.values[i].bias += gb
        elif isinstance(layer, ReLU):
            g = layers.relu_backward(g, cache[0])
        elif isinstance(layer, LRN):
            g = layers.lrn_backward(g, cache[0], cache[1], layer.n, layer.k, layer.alpha, layer.beta)
        elif isinstance(layer, MaxPool):
            g = layers.maxpool_backward(g, cache[0], cache[1], cache[2])
        elif isinstance(layer, Flatten):
            g = g.reshape(cache[0])
        elif isinstance(layer, FullyConnected):
            p = params.values[i]
            g, gw, gb = layers.fc_backward(g, cache[0], p.weights)
            grads.values[i].weights += gw
            grads.values[i].bias += gb
    return grads, g


def layer_label(spec: NetworkSpec, index: int) -> str:
    return f"layer{index:02d}.{_LAYER_TAGS[type(spec.layers[index])]}"
