"""CNN layer primitives with explicit forward and backward passes.

Everything is float64 and single-image (no batch axis); the training loop
iterates items and averages gradients. Convolution follows the
cross-correlation convention with zero padding. The conv and pool inner
loops dispatch to the selected kernel backend.
"""

from __future__ import annotations

import numpy as np

from .. import _kernels


def _as_f64(x) -> np.ndarray:
    return np.ascontiguousarray(x, dtype=np.float64)


def conv2d_output_shape(h: int, w: int, kh: int, kw: int, stride: int, pad: int) -> tuple[int, int]:
    if h + 2 * pad < kh or w + 2 * pad < kw:
        raise ValueError(f"kernel {kh}x{kw} does not fit input {h}x{w} with pad {pad}")
    return (h + 2 * pad - kh) // stride + 1, (w + 2 * pad - kw) // stride + 1


def conv2d_forward(x, weights, bias, stride: int, pad: int) -> np.ndarray:
    """out[o,y,x] = bias[o] + sum_{c,i,j} x[c, y*s+i-pad, x*s+j-pad] * w[o,c,i,j]
    with zeros outside the input bounds."""
    x, weights, bias = _as_f64(x), _as_f64(weights), _as_f64(bias)
    if x.ndim != 3 or weights.ndim != 4 or x.shape[0] != weights.shape[1]:
        raise ValueError(f"conv shape mismatch: input {x.shape}, weights {weights.shape}")
    if bias.shape != (weights.shape[0],):
        raise ValueError(f"conv bias shape {bias.shape} != ({weights.shape[0]},)")
    conv2d_output_shape(x.shape[1], x.shape[2], weights.shape[2], weights.shape[3], stride, pad)
    return _kernels.conv2d_forward(x, weights, bias, stride, pad)


def conv2d_backward(grad_out, x, weights, stride: int, pad: int):
    """Gradients of conv2d_forward w.r.t. input, weights and bias."""
    grad_out, x, weights = _as_f64(grad_out), _as_f64(x), _as_f64(weights)
    oh, ow = conv2d_output_shape(
        x.shape[1], x.shape[2], weights.shape[2], weights.shape[3], stride, pad
    )
    if grad_out.shape != (weights.shape[0], oh, ow):
        raise ValueError(f"grad shape {grad_out.shape} != {(weights.shape[0], oh, ow)}")
    return _kernels.conv2d_backward(grad_out, x, weights, stride, pad)


def relu_forward(x) -> np.ndarray:
    return np.maximum(x, 0.0)


def relu_backward(grad_out, x) -> np.ndarray:
    # subgradient 0 at x == 0
    return np.where(x > 0.0, grad_out, 0.0)


def _channel_window_sum(t: np.ndarray, n: int) -> np.ndarray:
    """Sum of t over a centered channel window of width n, clipped at the
    channel bounds."""
    c = t.shape[0]
    half = (n - 1) // 2
    cs = np.concatenate([np.zeros((1,) + t.shape[1:]), np.cumsum(t, axis=0)], axis=0)
    lo = np.maximum(np.arange(c) - half, 0)
    hi = np.minimum(np.arange(c) + half + 1, c)
    return cs[hi] - cs[lo]


def lrn_forward(x, n: int, k: float, alpha: float, beta: float):
    """Cross-channel response normalization:
    out[c] = x[c] / (k + (alpha/n) * sum_{j in window(c,n)} x[j]^2)^beta.
    Returns (out, scale) where scale is the parenthesized denominator base,
    cached for the backward pass."""
    if n < 1 or n % 2 == 0:
        raise ValueError("LRN window width must be odd and >= 1")
    x = _as_f64(x)
    scale = k + (alpha / n) * _channel_window_sum(x * x, n)
    return x * scale ** -beta, scale


def lrn_backward(grad_out, x, scale, n: int, k: float, alpha: float, beta: float) -> np.ndarray:
    t = grad_out * x * scale ** (-beta - 1.0)
    return grad_out * scale ** -beta - (2.0 * alpha * beta / n) * x * _channel_window_sum(t, n)


def maxpool_forward(x, size: int, stride: int):
    """Per-window maximum; ties resolve to the first element in row-major
    window order. Returns (out, argmax) with argmax holding flat input
    indices (y*width + x)."""
    x = _as_f64(x)
    if x.shape[1] < size or x.shape[2] < size:
        raise ValueError(f"pool window {size} larger than input {x.shape[1]}x{x.shape[2]}")
    return _kernels.maxpool_forward(x, size, stride)


def maxpool_backward(grad_out, argmax, height: int, width: int) -> np.ndarray:
    return _kernels.maxpool_backward(_as_f64(grad_out), argmax, height, width)


def fc_forward(x, weights, bias) -> np.ndarray:
    x, weights, bias = _as_f64(x), _as_f64(weights), _as_f64(bias)
    if x.ndim != 1 or weights.ndim != 2 or weights.shape[1] != x.shape[0]:
        raise ValueError(f"fc shape mismatch: input {x.shape}, weights {weights.shape}")
    if bias.shape != (weights.shape[0],):
        raise ValueError(f"fc bias shape {bias.shape} != ({weights.shape[0]},)")
    return weights @ x + bias


def fc_backward(grad_out, x, weights):
    grad_out = _as_f64(grad_out)
    return weights.T @ grad_out, np.outer(grad_out, x), grad_out.copy()


def softmax(logits) -> np.ndarray:
    """Max-subtracted softmax; outputs are positive and sum to 1."""
    z = _as_f64(logits)
    e = np.exp(z - z.max())
    return e / e.sum()


def cross_entropy(probs, label: int) -> float:
    """-log(probs[label]) with the probability clamped at 1e-12."""
    probs = np.asarray(probs)
    if not 0 <= label < probs.shape[0]:
        raise ValueError(f"label {label} out of range for {probs.shape[0]} classes")
    return float(-np.log(max(float(probs[label]), 1e-12)))


def softmax_cross_entropy_grad(probs, label: int) -> np.ndarray:
    """Fused gradient of cross_entropy(softmax(logits), label) w.r.t. the
    logits: probs - onehot(label)."""
    grad = np.array(probs, dtype=np.float64, copy=True)
    grad[label] -= 1.0
    return grad
