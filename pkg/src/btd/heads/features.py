"""Feature extraction for the external classifier heads: the activation
feeding the final fully connected layer (the output of the last hidden
layer's ReLU)."""

from __future__ import annotations

import numpy as np

from ..nn.network import FullyConnected, NetworkSpec, Parameters, forward_full


def feature_dim(spec: NetworkSpec) -> int:
    """Width of the penultimate activation."""
    return spec.shapes()[-2][0]


def extract_features(spec: NetworkSpec, params: Parameters, x: np.ndarray) -> np.ndarray:
    """Penultimate activation vector for one input tensor."""
    if not isinstance(spec.layers[-1], FullyConnected):
        raise ValueError("network must end in a fully connected layer")
    _, caches = forward_full(spec, params, x)
    return np.asarray(caches[-1][0], dtype=np.float64).copy()
