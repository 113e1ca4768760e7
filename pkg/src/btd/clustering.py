"""Lloyd's k-means over pixel intensities, image quantization and
per-cluster first-order statistics.

The 1-d path collapses the input to (distinct value, multiplicity) pairs
and computes means and inertia with math.fsum, so results are exact
(correctly rounded) and independent of summation order. A generalized
n-dimensional Lloyd routine backs the RBF head's center selection.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .imageio import GrayImage
from .prng import Prng


class ClusteringError(ValueError):
    pass


class EmptyInputError(ClusteringError):
    pass


class InfeasibleKError(ClusteringError):
    pass


@dataclass(frozen=True)
class ClusterModel:
    """Converged 1-d model. centers are strictly ascending; exact duplicates
    produced by the iteration are merged, so k == len(centers) and may be
    smaller than the requested cluster count."""

    k: int
    centers: tuple[float, ...]
    iterations_run: int
    inertia: float
    seed: int

    def to_json_obj(self) -> dict:
        return {
            "k": self.k,
            "centers": list(self.centers),
            "seed": self.seed,
            "iterations_run": self.iterations_run,
            "inertia": self.inertia,
        }

    @classmethod
    def from_json_obj(cls, obj: dict) -> "ClusterModel":
        return cls(
            k=int(obj["k"]),
            centers=tuple(float(c) for c in obj["centers"]),
            iterations_run=int(obj["iterations_run"]),
            inertia=float(obj["inertia"]),
            seed=int(obj["seed"]),
        )


def _assign(values: np.ndarray, centers: np.ndarray) -> np.ndarray:
    """Nearest center per value; ties go to the lower index (centers are
    kept ascending, so that is the smaller center)."""
    return np.abs(values[:, None] - centers[None, :]).argmin(axis=1)


def _weighted_inertia(values, counts, centers, assign) -> float:
    return math.fsum(
        counts[i] * (values[i] - centers[assign[i]]) ** 2 for i in range(len(values))
    )


def lloyd_1d(values: np.ndarray, counts: np.ndarray, init_centers, max_iter: int,
             tol: float) -> tuple[np.ndarray, int, float, list[float]]:
    """Weighted 1-d Lloyd iteration from explicit initial centers.

    values: distinct sample values; counts: their multiplicities.
    Returns (centers ascending, iterations run, final inertia, the
    per-iteration inertia history measured after each assignment).
    """
    centers = np.sort(np.asarray(init_centers, dtype=np.float64))
    k = len(centers)
    history: list[float] = []
    iterations = 0
    for _ in range(max_iter):
        assign = _assign(values, centers)
        # a center that lost all members is re-seeded to the value farthest
        # from its assigned center, then everything is reassigned
        present = np.bincount(assign, minlength=k) > 0
        if not present.all():
            taken: set[int] = set()
            for j in np.flatnonzero(~present):
                dist = np.abs(values - centers[assign])
                for used in taken:
                    dist[used] = -1.0
                far = int(dist.argmax())
                centers[j] = values[far]
                taken.add(far)
            assign = _assign(values, centers)
        inertia = _weighted_inertia(values, counts, centers, assign)
        if history:
            assert inertia <= history[-1] * (1 + 1e-12) + 1e-12, "inertia increased"
        history.append(inertia)
        new_centers = centers.copy()
        for j in range(k):
            members = assign == j
            total = int(counts[members].sum())
            if total > 0:
                new_centers[j] = math.fsum(
                    float(counts[i]) * float(values[i]) for i in np.flatnonzero(members)
                ) / total
        new_centers.sort()
        movement = float(np.abs(new_centers - centers).max())
        centers = new_centers
        iterations += 1
        if movement < tol:
            break
    assign = _assign(values, centers)
    final = _weighted_inertia(values, counts, centers, assign)
    if history:
        assert final <= history[-1] * (1 + 1e-12) + 1e-12, "inertia increased"
    history.append(final)
    return centers, iterations, final, history


def kmeans_1d(values, k: int, seed: int, max_iter: int = 100, tol: float = 1e-4) -> ClusterModel:
    """k-means over scalar values. Initial centers are k distinct values
    sampled uniformly without replacement from the artifact PRNG stream
    "kmeans" derived from `seed`."""
    arr = np.asarray(values, dtype=np.float64).reshape(-1)
    if arr.size == 0:
        raise EmptyInputError("cannot cluster an empty value sequence")
    if k < 1:
        raise InfeasibleKError("k must be >= 1")
    if max_iter < 1:
        raise ValueError("max_iter must be >= 1")
    uniq, counts = np.unique(arr, return_counts=True)
    if k > uniq.size:
        raise InfeasibleKError(f"k={k} exceeds {uniq.size} distinct values")
    rng = Prng.for_stream(seed, "kmeans")
    init = uniq[sorted(rng.sample_indices(uniq.size, k))]
    centers, iterations, inertia, _ = lloyd_1d(uniq, counts, init, max_iter, tol)
    merged = tuple(dict.fromkeys(centers.tolist()))
    return ClusterModel(
        k=len(merged),
        centers=merged,
        iterations_run=iterations,
        inertia=inertia,
        seed=seed,
    )


def _center_lut(model: ClusterModel) -> tuple[np.ndarray, np.ndarray]:
    """Per-intensity assignment and rounded replacement value for all 256
    possible pixel intensities."""
    centers = np.asarray(model.centers, dtype=np.float64)
    assign = _assign(np.arange(256, dtype=np.float64), centers)
    rounded = np.clip(np.floor(centers + 0.5), 0, 255).astype(np.uint8)
    return assign, rounded[assign]


def quantize_image(img: GrayImage, model: ClusterModel) -> GrayImage:
    """Replace every pixel with its nearest center, rounded half-up. The
    output palette has at most k distinct values."""
    _, replacement = _center_lut(model)
    return GrayImage(img.width, img.height, replacement[img.pixels])


@dataclass(frozen=True)
class ClusterStats:
    count: int
    mean: float
    variance: float


def first_order_stats(img: GrayImage, model: ClusterModel) -> list[ClusterStats]:
    """Count, mean and population variance of the pixels assigned to each
    center, in center order. An empty cluster reports count 0, the center
    value as mean, and variance 0."""
    assign, _ = _center_lut(model)
    hist = np.bincount(img.flat, minlength=256).astype(np.int64)
    intensities = np.arange(256, dtype=np.int64)
    stats = []
    for j, center in enumerate(model.centers):
        member = assign == j
        n = int(hist[member].sum())
        if n == 0:
            stats.append(ClusterStats(0, float(center), 0.0))
            continue
        s = int((hist[member] * intensities[member]).sum())
        ss = int((hist[member] * intensities[member] ** 2).sum())
        mean = s / n
        variance = max(0.0, ss / n - mean * mean)
        stats.append(ClusterStats(n, mean, variance))
    return stats


def lloyd_nd(points: np.ndarray, k: int, rng: Prng, max_iter: int = 100,
             tol: float = 1e-4) -> tuple[np.ndarray, int, float]:
    """Euclidean Lloyd iteration in d dimensions, used for RBF center
    selection. Initialization samples k distinct rows without replacement;
    center order is the initialization order (no canonical sort exists in
    d > 1). Returns (centers [k, d], iterations run, inertia)."""
    pts = np.asarray(points, dtype=np.float64)
    if pts.ndim != 2 or pts.shape[0] == 0:
        raise EmptyInputError("points must be a non-empty [n, d] array")
    uniq = np.unique(pts, axis=0)
    if k < 1 or k > uniq.shape[0]:
        raise InfeasibleKError(f"k={k} infeasible for {uniq.shape[0]} distinct points")
    centers = uniq[rng.sample_indices(uniq.shape[0], k)].copy()
    iterations = 0
    prev_inertia = math.inf
    for _ in range(max_iter):
        d2 = ((pts[:, None, :] - centers[None, :, :]) ** 2).sum(axis=2)
        assign = d2.argmin(axis=1)
        present = np.bincount(assign, minlength=k) > 0
        if not present.all():
            taken: set[int] = set()
            for j in np.flatnonzero(~present):
                dist = d2[np.arange(len(pts)), assign].copy()
                for used in taken:
                    dist[used] = -1.0
                far = int(dist.argmax())
                centers[j] = pts[far]
                taken.add(far)
            d2 = ((pts[:, None, :] - centers[None, :, :]) ** 2).sum(axis=2)
            assign = d2.argmin(axis=1)
        inertia = float(d2[np.arange(len(pts)), assign].sum())
        assert inertia <= prev_inertia * (1 + 1e-9) + 1e-9, "inertia increased"
        prev_inertia = inertia
        new_centers = centers.copy()
        for j in range(k):
            members = assign == j
            if members.any():
                new_centers[j] = pts[members].mean(axis=0)
        movement = float(np.abs(new_centers - centers).max())
        centers = new_centers
        iterations += 1
        if movement < tol:
            break
    d2 = ((pts[:, None, :] - centers[None, :, :]) ** 2).sum(axis=2)
    inertia = float(d2.min(axis=1).sum())
    return centers, iterations, inertia
