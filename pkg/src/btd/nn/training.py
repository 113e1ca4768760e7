"""SGD training over a layer stack: per-item backprop, mean batch
gradients in a fixed order, and momentum updates."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..prng import Prng
from . import layers
from .network import NetworkSpec, Parameters, backward, forward_full, layer_label


class DivergenceError(RuntimeError):
    pass


@dataclass(frozen=True)
class TrainConfig:
    learning_rate: float = 0.01
    momentum: float = 0.9
    weight_decay: float = 5e-4
    batch_size: int = 10
    epochs: int = 10
    seed: int = 0

    def __post_init__(self):
        if self.learning_rate <= 0:
            raise ValueError("learning_rate must be > 0")
        if not 0 <= self.momentum < 1:
            raise ValueError("momentum must lie in [0, 1)")
        if self.weight_decay < 0:
            raise ValueError("weight_decay must be >= 0")
        if self.batch_size < 1 or self.epochs < 1:
            raise ValueError("batch_size and epochs must be >= 1")


@dataclass(frozen=True)
class EpochStats:
    epoch: int
    mean_loss: float
    accuracy: float


@dataclass
class TrainHistory:
    epochs: list[EpochStats]

    def to_json_obj(self) -> list[dict]:
        return [
            {"epoch": e.epoch, "mean_loss": e.mean_loss, "accuracy": e.accuracy}
            for e in self.epochs
        ]


def item_loss_and_grads(spec: NetworkSpec, params: Parameters, x: np.ndarray, label: int):
    """(loss, parameter gradients, predicted class) for one item under
    softmax cross-entropy."""
    logits, caches = forward_full(spec, params, x)
    probs = layers.softmax(logits)
    loss = layers.cross_entropy(probs, label)
    grads, _ = backward(spec, params, caches, layers.softmax_cross_entropy_grad(probs, label))
    return loss, grads, int(np.argmax(probs))


def _step(spec: NetworkSpec, params: Parameters, velocity: Parameters, batch, cfg: TrainConfig):
    """One SGD step over a batch; returns (mean loss, correct count).
    Mutates params and velocity in place."""
    total = params.zeros_like()
    losses = []
    correct = 0
    for x, label in batch:
        loss, grads, pred = item_loss_and_grads(spec, params, x, label)
        if not np.isfinite(loss):
            raise DivergenceError("non-finite loss")
        losses.append(loss)
        correct += int(pred == label)
        for (i, name, acc), (_, _, g) in zip(total.tensors(), grads.tensors()):
            if not np.all(np.isfinite(g)):
                raise DivergenceError(f"non-finite gradient in {layer_label(spec, i)}")
            acc += g
    scale = 1.0 / len(batch)
    with np.errstate(over="ignore", invalid="ignore"):  # divergence is raised, not warned
        for i, p in enumerate(params.values):
            if p is None:
                continue
            v, g = velocity.values[i], total.values[i]
            for attr in ("weights", "bias"):
                w = getattr(p, attr)
                vel = getattr(v, attr)
                step = getattr(g, attr) * scale + cfg.weight_decay * w
                vel *= cfg.momentum
                vel -= cfg.learning_rate * step
                w += vel
                if not np.all(np.isfinite(w)):
                    raise DivergenceError(f"non-finite {attr} in {layer_label(spec, i)}")
    return float(np.mean(losses)), correct


def train_step(spec: NetworkSpec, params: Parameters, velocity: Parameters, batch,
               cfg: TrainConfig):
    """SGD with momentum over one batch:
    v <- momentum*v - lr*(grad + weight_decay*w);  w <- w + v.
    The batch gradient is the mean over items, accumulated in batch order.
    Returns (params, mean batch loss); params and velocity are updated in
    place."""
    loss, _ = _step(spec, params, velocity, batch, cfg)
    return params, loss


def train(spec: NetworkSpec, params: Parameters, data, cfg: TrainConfig) -> TrainHistory:
    """Epoch loop over (tensor, label) pairs. Item order is reshuffled each
    epoch from the PRNG stream "shuffle" of cfg.seed, so the trajectory is
    a pure function of (spec, params, data order, cfg)."""
    rng = Prng.for_stream(cfg.seed, "shuffle")
    velocity = params.zeros_like()
    history = TrainHistory([])
    n = len(data)
    for epoch in range(cfg.epochs):
        order = list(range(n))
        rng.shuffle(order)
        loss_sum = 0.0
        correct = 0
        for start in range(0, n, cfg.batch_size):
            batch = [data[i] for i in order[start : start + cfg.batch_size]]
            try:
                loss, ncorrect = _step(spec, params, velocity, batch, cfg)
            except DivergenceError as exc:
                raise DivergenceError(f"epoch {epoch}: {exc}") from exc
            loss_sum += loss * len(batch)
            correct += ncorrect
        history.epochs.append(EpochStats(epoch, loss_sum / n, correct / n))
    return history


def evaluate(spec: NetworkSpec, params: Parameters, data) -> tuple[list[int], float]:
    """Predicted classes and accuracy over (tensor, label) pairs."""
    preds = []
    correct = 0
    for x, label in data:
        logits, _ = forward_full(spec, params, x)
        pred = int(np.argmax(layers.softmax(logits)))
        preds.append(pred)
        correct += int(pred == label)
    return preds, correct / len(data) if data else 0.0
