"""Greedy CART decision tree with Gini impurity.

Candidate thresholds are midpoints between consecutive distinct sorted
values of each feature. All ties are broken deterministically: best split
by (lower feature index, lower threshold), leaf class by lowest class
index, routing goes left when x[feature] <= threshold.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np


@dataclass(frozen=True)
class InternalNode:
    feature: int
    threshold: float
    left: int
    right: int


@dataclass(frozen=True)
class LeafNode:
    klass: int
    counts: tuple[int, ...]


@dataclass(frozen=True)
class DecisionTree:
    nodes: tuple[InternalNode | LeafNode, ...]
    root: int = 0

    def depth(self) -> int:
        def walk(i: int) -> int:
            node = self.nodes[i]
            if isinstance(node, LeafNode):
                return 0
            return 1 + max(walk(node.left), walk(node.right))

        return walk(self.root)

    def to_json_obj(self) -> dict:
        nodes = []
        for node in self.nodes:
            if isinstance(node, LeafNode):
                nodes.append({"kind": "leaf", "class": node.klass, "counts": list(node.counts)})
            else:
                nodes.append(
                    {
                        "kind": "internal",
                        "feature": node.feature,
                        "threshold": node.threshold,
                        "left": node.left,
                        "right": node.right,
                    }
                )
        return {"root": self.root, "nodes": nodes}

    @classmethod
    def from_json_obj(cls, obj: dict) -> "DecisionTree":
        nodes: list[InternalNode | LeafNode] = []
        for entry in obj["nodes"]:
            if entry["kind"] == "leaf":
                nodes.append(LeafNode(int(entry["class"]), tuple(int(c) for c in entry["counts"])))
            else:
                nodes.append(
                    InternalNode(
                        int(entry["feature"]),
                        float(entry["threshold"]),
                        int(entry["left"]),
                        int(entry["right"]),
                    )
                )
        return cls(tuple(nodes), int(obj["root"]))


def _gini(counts: np.ndarray) -> float:
    n = counts.sum()
    if n == 0:
        return 0.0
    p = counts / n
    return float(1.0 - (p * p).sum())


def _best_split(feats: np.ndarray, labels: np.ndarray, num_classes: int):
    """(feature, threshold, weighted impurity) of the best candidate, or
    None when no candidate threshold exists (every feature is constant).
    Zero-gain splits are allowed: a node with mixed labels may need a
    gain-free first cut (XOR-style data) before purity is reachable."""
    n, d = feats.shape
    best = None
    best_impurity = np.inf
    for f in range(d):
        order = np.argsort(feats[:, f], kind="stable")
        vals = feats[order, f]
        labs = labels[order]
        onehot = np.zeros((n, num_classes))
        onehot[np.arange(n), labs] = 1.0
        left_counts = np.cumsum(onehot, axis=0)
        total = left_counts[-1]
        boundaries = np.flatnonzero(vals[:-1] != vals[1:])
        for b in boundaries:
            nl = b + 1
            nr = n - nl
            lc = left_counts[b]
            rc = total - lc
            weighted = (nl / n) * _gini(lc) + (nr / n) * _gini(rc)
            if weighted < best_impurity:
                best_impurity = weighted
                best = (f, (vals[b] + vals[b + 1]) / 2.0, weighted)
    return best


def _leaf(labels: np.ndarray, num_classes: int) -> LeafNode:
    counts = np.bincount(labels, minlength=num_classes)
    return LeafNode(int(counts.argmax()), tuple(int(c) for c in counts))


def train_dt(features, labels, max_depth: int = 12, min_samples_split: int = 2,
             num_classes: int | None = None) -> DecisionTree:
    """Grow the tree depth-first (preorder node layout, root at index 0)."""
    feats = np.asarray(features, dtype=np.float64)
    labs = np.asarray(labels, dtype=np.int64)
    if feats.ndim != 2 or feats.shape[0] == 0 or feats.shape[0] != labs.shape[0]:
        raise ValueError("features must be a non-empty [n, d] array with matching labels")
    if max_depth < 0 or min_samples_split < 2:
        raise ValueError("max_depth must be >= 0 and min_samples_split >= 2")
    nc = int(labs.max()) + 1 if num_classes is None else num_classes

    nodes: list[InternalNode | LeafNode | None] = []

    def grow(rows: np.ndarray, depth: int) -> int:
        idx = len(nodes)
        nodes.append(None)
        sub_labels = labs[rows]
        pure = np.all(sub_labels == sub_labels[0])
        if pure or depth >= max_depth or rows.size < min_samples_split:
            nodes[idx] = _leaf(sub_labels, nc)
            return idx
        split = _best_split(feats[rows], sub_labels, nc)
        if split is None:
            nodes[idx] = _leaf(sub_labels, nc)
            return idx
        feature, threshold, _ = split
        mask = feats[rows, feature] <= threshold
        left = grow(rows[mask], depth + 1)
        right = grow(rows[~mask], depth + 1)
        nodes[idx] = InternalNode(feature, threshold, left, right)
        return idx

    grow(np.arange(feats.shape[0]), 0)
    return DecisionTree(tuple(nodes))


def dt_predict(tree: DecisionTree, x) -> int:
    """Route to a leaf; go left when x[feature] <= threshold."""
    return dt_leaf(tree, x).klass


def dt_leaf(tree: DecisionTree, x) -> LeafNode:
    x = np.asarray(x, dtype=np.float64)
    node = tree.nodes[tree.root]
    while isinstance(node, InternalNode):
        if node.feature >= x.shape[0]:
            raise ValueError(f"feature {node.feature} out of range for dim {x.shape[0]}")
        node = tree.nodes[node.left if x[node.feature] <= node.threshold else node.right]
    return node
