"""Central-finite-difference verification of the analytic gradients.

A probe is only meaningful when the loss is smooth on [w-eps, w+eps]; a
perturbation that flips a ReLU sign or a pool argmax puts a kink inside
the interval and invalidates the central difference. Such probes are
detected by comparing activation patterns at the two endpoints, skipped,
and redrawn from other coordinates.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..prng import Prng
from . import layers
from .network import MaxPool, NetworkSpec, Parameters, ReLU, backward, forward_full, layer_label


@dataclass(frozen=True)
class LayerCheck:
    label: str
    max_rel_error: float
    checked: int
    skipped: int


@dataclass(frozen=True)
class GradCheckReport:
    layers: tuple[LayerCheck, ...]
    max_rel_error: float
    eps: float
    tolerance: float

    @property
    def passed(self) -> bool:
        return self.max_rel_error <= self.tolerance and all(c.checked > 0 for c in self.layers)

    def format_lines(self) -> list[str]:
        lines = [
            f"{c.label:24s} checked {c.checked:4d}  skipped {c.skipped:2d}  "
            f"max rel err {c.max_rel_error:.3e}"
            for c in self.layers
        ]
        verdict = "PASS" if self.passed else "FAIL"
        lines.append(
            f"{verdict}: max relative error {self.max_rel_error:.3e}"
            f" (tolerance {self.tolerance:.1e}, eps {self.eps:.1e})"
        )
        return lines


def _loss_and_pattern(spec: NetworkSpec, params: Parameters, x: np.ndarray, label: int):
    """Loss plus the activation pattern: ReLU sign masks and pool argmax
    maps, which pin down the linear region the forward pass went through."""
    logits, caches = forward_full(spec, params, x)
    loss = layers.cross_entropy(layers.softmax(logits), label)
    pattern = []
    for layer, cache in zip(spec.layers, caches):
        if isinstance(layer, ReLU):
            pattern.append(cache[0] > 0.0)
        elif isinstance(layer, MaxPool):
            pattern.append(cache[0])
    return loss, pattern


def _same_pattern(a, b) -> bool:
    return all(np.array_equal(u, v) for u, v in zip(a, b))


def grad_check(spec: NetworkSpec, params: Parameters, x: np.ndarray, label: int,
               eps: float = 1e-5, tolerance: float = 1e-4,
               samples_per_tensor: int = 16, seed: int = 0) -> GradCheckReport:
    """Compare analytic parameter gradients against central differences
    (L(w+eps) - L(w-eps)) / (2 eps), using the relative error
    |a - n| / max(|a|, |n|, 1e-8). Large tensors are probed at a
    deterministic random coordinate subset."""
    logits, caches = forward_full(spec, params, x)
    probs = layers.softmax(logits)
    grads, _ = backward(spec, params, caches, layers.softmax_cross_entropy_grad(probs, label))
    rng = Prng.for_stream(seed, "gradcheck")

    per_layer: dict[int, tuple[float, int, int]] = {}
    for (i, name, w), (_, _, g) in zip(params.tensors(), grads.tensors()):
        flat_w = w.reshape(-1)
        flat_g = g.reshape(-1)
        if flat_w.size <= 4 * samples_per_tensor:
            candidates = list(range(flat_w.size))
        else:
            candidates = rng.sample_indices(flat_w.size, 4 * samples_per_tensor)
        worst, checked, skipped = per_layer.get(i, (0.0, 0, 0))
        valid = 0
        for j in candidates:
            if valid == samples_per_tensor:
                break
            orig = flat_w[j]
            flat_w[j] = orig + eps
            up, pat_up = _loss_and_pattern(spec, params, x, label)
            flat_w[j] = orig - eps
            down, pat_down = _loss_and_pattern(spec, params, x, label)
            flat_w[j] = orig
            if not _same_pattern(pat_up, pat_down):
                skipped += 1
                continue
            numeric = (up - down) / (2.0 * eps)
            analytic = flat_g[j]
            rel = abs(analytic - numeric) / max(abs(analytic), abs(numeric), 1e-8)
            worst = max(worst, rel)
            valid += 1
        per_layer[i] = (worst, checked + valid, skipped)

    checks = tuple(
        LayerCheck(layer_label(spec, i), worst, n, skipped)
        for i, (worst, n, skipped) in sorted(per_layer.items())
    )
    overall = max((c.max_rel_error for c in checks), default=0.0)
    return GradCheckReport(checks, overall, eps, tolerance)
