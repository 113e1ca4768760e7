"""Gaussian radial-basis-function network head.

Centers come from per-class k-means over the feature vectors, widths from
the mean distance to each center's two nearest neighbors, and the linear
output map from ridge-regularized least squares against one-hot targets,
solved by normal equations with a Cholesky factorization.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..clustering import lloyd_nd
from ..prng import Prng


class SingularModelError(ValueError):
    """Normal matrix is not positive definite; raise ridge above 0."""


@dataclass
class RBFModel:
    centers: np.ndarray        # [m, d]
    widths: np.ndarray         # [m], positive
    output_weights: np.ndarray  # [m+1, num_classes]; last row is the bias
    train_accuracy: float | None = None

    def to_json_obj(self) -> dict:
        return {
            "centers": self.centers.tolist(),
            "widths": self.widths.tolist(),
            "output_weights": self.output_weights.tolist(),
            "train_accuracy": self.train_accuracy,
        }

    @classmethod
    def from_json_obj(cls, obj: dict) -> "RBFModel":
        return cls(
            centers=np.asarray(obj["centers"], dtype=np.float64),
            widths=np.asarray(obj["widths"], dtype=np.float64),
            output_weights=np.asarray(obj["output_weights"], dtype=np.float64),
            train_accuracy=obj.get("train_accuracy"),
        )


def _hidden(model_centers: np.ndarray, widths: np.ndarray, x: np.ndarray) -> np.ndarray:
    d2 = ((x[None, :] - model_centers) ** 2).sum(axis=1)
    return np.exp(-d2 / (2.0 * widths ** 2))


def _widths_from_centers(centers: np.ndarray) -> np.ndarray:
    """Mean distance from each center to its two nearest other centers;
    with fewer than 3 centers, the global mean pairwise distance. Falls
    back to 1.0 if the result would be non-positive (coincident centers)."""
    m = centers.shape[0]
    if m == 1:
        return np.ones(1)
    dist = np.sqrt(((centers[:, None, :] - centers[None, :, :]) ** 2).sum(axis=2))
    if m < 3:
        pairwise = dist[np.triu_indices(m, k=1)]
        fill = float(pairwise.mean())
        widths = np.full(m, fill if fill > 0 else 1.0)
        return widths
    np.fill_diagonal(dist, np.inf)
    nearest_two = np.sort(dist, axis=1)[:, :2]
    widths = nearest_two.mean(axis=1)
    bad = widths <= 0
    if bad.any():
        finite = dist[np.isfinite(dist)]
        pos = finite[finite > 0]
        widths[bad] = float(pos.mean()) if pos.size else 1.0
    return widths


def _cholesky_solve(gram: np.ndarray, rhs: np.ndarray) -> np.ndarray:
    try:
        low = np.linalg.cholesky(gram)
    except np.linalg.LinAlgError as exc:
        raise SingularModelError(
            "normal matrix is singular; use ridge > 0"
        ) from exc
    n = gram.shape[0]
    y = np.empty_like(rhs)
    for i in range(n):  # forward substitution
        y[i] = (rhs[i] - low[i, :i] @ y[:i]) / low[i, i]
    out = np.empty_like(rhs)
    for i in range(n - 1, -1, -1):  # back substitution
        out[i] = (y[i] - low[i + 1:, i] @ out[i + 1:]) / low[i, i]
    return out


def train_rbf(features, labels, k_per_class: int = 4, ridge: float = 1e-6,
              seed: int = 0) -> RBFModel:
    """Fit the RBF head on feature vectors with integer class labels."""
    feats = np.asarray(features, dtype=np.float64)
    labs = np.asarray(labels, dtype=np.int64)
    if feats.ndim != 2 or feats.shape[0] != labs.shape[0] or feats.shape[0] == 0:
        raise ValueError("features must be [n, d] with one label per row")
    if ridge < 0:
        raise ValueError("ridge must be >= 0")
    num_classes = int(labs.max()) + 1
    rng = Prng.for_stream(seed, "rbf-centers")
    center_blocks = []
    for cls in range(num_classes):
        rows = feats[labs == cls]
        if rows.shape[0] < k_per_class:
            raise ValueError(
                f"class {cls} has {rows.shape[0]} samples, fewer than k_per_class={k_per_class}"
            )
        k = min(k_per_class, np.unique(rows, axis=0).shape[0])
        centers, _, _ = lloyd_nd(rows, k, rng)
        center_blocks.append(centers)
    centers = np.concatenate(center_blocks, axis=0)
    widths = _widths_from_centers(centers)

    phi = np.stack([_hidden(centers, widths, x) for x in feats])
    design = np.concatenate([phi, np.ones((feats.shape[0], 1))], axis=1)
    gram = design.T @ design + ridge * np.eye(design.shape[1])
    weights = _cholesky_solve(gram, design.T @ _one_hot(labs, num_classes))
    model = RBFModel(centers, widths, weights)
    preds = [rbf_predict(model, x)[0] for x in feats]
    model.train_accuracy = float(np.mean(np.asarray(preds) == labs))
    return model


def _one_hot(labels: np.ndarray, num_classes: int) -> np.ndarray:
    out = np.zeros((labels.shape[0], num_classes))
    out[np.arange(labels.shape[0]), labels] = 1.0
    return out


def rbf_predict(model: RBFModel, x) -> tuple[int, np.ndarray]:
    """(argmax class, score vector); argmax ties go to the lowest index."""
    x = np.asarray(x, dtype=np.float64)
    if x.shape != (model.centers.shape[1],):
        raise ValueError(f"feature dim {x.shape} != {(model.centers.shape[1],)}")
    phi = _hidden(model.centers, model.widths, x)
    scores = phi @ model.output_weights[:-1] + model.output_weights[-1]
    return int(np.argmax(scores)), scores
