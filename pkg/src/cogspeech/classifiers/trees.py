"""Decision tree and random forest with greedy Gini splits.

Trees consume raw (unstandardized) features; axis-aligned splits are
scale-invariant. Leaves hold normalized class-frequency vectors, so tree
and forest scores are probabilities. The forest bootstraps rows and
subsamples sqrt(d) features per split; with one tree, bootstrap off, and
feature subsampling off it reproduces the plain tree exactly.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .base import (
    N_CLASSES,
    ScoreKind,
    SoftScoreClassifier,
    check_is_fitted,
    check_labels,
    check_matrix,
)

__all__ = ["TreeNode", "TreeClassifier", "ForestClassifier"]


@dataclass
class TreeNode:
    """Internal split (feature, threshold, children) or leaf (probs set)."""

    probs: np.ndarray
    feature: int | None = None
    threshold: float | None = None
    left: "TreeNode | None" = None
    right: "TreeNode | None" = None

    @property
    def is_leaf(self) -> bool:
        return self.feature is None

    def depth(self) -> int:
        if self.is_leaf:
            return 0
        return 1 + max(self.left.depth(), self.right.depth())


def _best_split(X, y, feature_ids, min_leaf):
    """Lowest weighted-Gini split over the given features.

    Returns (cost, feature, threshold) or None when no candidate keeps
    both children at min_leaf rows. Ties keep the first candidate in
    (feature order, threshold order), which makes training deterministic.
    """
    n = len(y)
    best = None
    for f in feature_ids:
        order = np.argsort(X[:, f], kind="stable")
        values = X[order, f]
        onehot = np.zeros((n, N_CLASSES))
        onehot[np.arange(n), y[order]] = 1.0
        left_counts = np.cumsum(onehot, axis=0)  # counts for splits after row i
        total = left_counts[-1]
        for s in range(min_leaf, n - min_leaf + 1):
            if s > n - 1 or values[s - 1] == values[s]:
                continue
            threshold = (values[s - 1] + values[s]) / 2.0
            if threshold <= values[s - 1]:  # midpoint collapsed onto the left value
                continue
            lc = left_counts[s - 1]
            rc = total - lc
            gini_l = 1.0 - np.sum((lc / s) ** 2)
            gini_r = 1.0 - np.sum((rc / (n - s)) ** 2)
            cost = (s * gini_l + (n - s) * gini_r) / n
            if best is None or cost < best[0]:
                best = (cost, int(f), float(threshold))
    return best


def _grow(X, y, depth, max_depth, min_leaf, max_features, rng) -> TreeNode:
    counts = np.bincount(y, minlength=N_CLASSES).astype(np.float64)
    node = TreeNode(probs=counts / counts.sum())
    pure = np.count_nonzero(counts) <= 1
    if pure or (max_depth is not None and depth >= max_depth) or len(y) < 2 * min_leaf:
        return node

    d = X.shape[1]
    if max_features is not None and max_features < d:
        feature_ids = np.sort(rng.choice(d, size=max_features, replace=False))
    else:
        feature_ids = np.arange(d)
    best = _best_split(X, y, feature_ids, min_leaf)
    if best is None:
        return node

    _, node.feature, node.threshold = best
    mask = X[:, node.feature] < node.threshold
    node.left = _grow(X[mask], y[mask], depth + 1, max_depth, min_leaf, max_features, rng)
    node.right = _grow(X[~mask], y[~mask], depth + 1, max_depth, min_leaf, max_features, rng)
    return node


def _node_scores(node: TreeNode, X: np.ndarray) -> np.ndarray:
    out = np.empty((len(X), N_CLASSES))
    for i, row in enumerate(X):
        cur = node
        while not cur.is_leaf:
            cur = cur.left if row[cur.feature] < cur.threshold else cur.right
        out[i] = cur.probs
    return out


class TreeClassifier(SoftScoreClassifier):
    """Greedy Gini decision tree emitting leaf class frequencies."""

    score_kind = ScoreKind.PROBABILITY

    def __init__(
        self,
        max_depth: int | None = None,
        min_leaf: int = 1,
        max_features: int | None = None,
        seed: int = 0,
    ):
        self.max_depth = max_depth
        self.min_leaf = min_leaf
        self.max_features = max_features
        self.seed = seed

    def fit(self, X, y) -> "TreeClassifier":
        X = check_matrix(X)
        y = check_labels(y, len(X))
        if len(X) < 1:
            raise ValueError("empty training data")
        rng = np.random.default_rng(self.seed)
        self.root_ = _grow(X, y, 0, self.max_depth, max(1, self.min_leaf), self.max_features, rng)
        self.n_features_ = X.shape[1]
        return self

    def soft_scores(self, X) -> np.ndarray:
        check_is_fitted(self, "root_")
        X = check_matrix(X)
        if X.shape[1] != self.n_features_:
            raise ValueError(f"expected {self.n_features_} features, got {X.shape[1]}")
        return _node_scores(self.root_, X)


class ForestClassifier(SoftScoreClassifier):
    """Bagged Gini trees with per-split feature subsampling.

    ``max_features="sqrt"`` resolves to round(sqrt(d)) at fit time; an int
    is taken as-is and None disables subsampling. Scores are the mean of
    the member trees' leaf frequencies.
    """

    score_kind = ScoreKind.PROBABILITY

    def __init__(
        self,
        n_trees: int = 50,
        max_depth: int | None = None,
        min_leaf: int = 1,
        max_features: int | str | None = "sqrt",
        bootstrap: bool = True,
        seed: int = 0,
    ):
        self.n_trees = n_trees
        self.max_depth = max_depth
        self.min_leaf = min_leaf
        self.max_features = max_features
        self.bootstrap = bootstrap
        self.seed = seed

    def _resolved_max_features(self, d: int) -> int | None:
        if self.max_features is None:
            return None
        if self.max_features == "sqrt":
            return max(1, int(round(np.sqrt(d))))
        return int(self.max_features)

    def fit(self, X, y) -> "ForestClassifier":
        X = check_matrix(X)
        y = check_labels(y, len(X))
        if len(X) < 1:
            raise ValueError("empty training data")
        n, d = X.shape
        max_features = self._resolved_max_features(d)
        rng = np.random.default_rng(self.seed)
        self.trees_ = []
        for _ in range(self.n_trees):
            idx = rng.integers(0, n, size=n) if self.bootstrap else np.arange(n)
            tree_rng = np.random.default_rng(int(rng.integers(0, 2**63)))
            root = _grow(X[idx], y[idx], 0, self.max_depth, max(1, self.min_leaf), max_features, tree_rng)
            self.trees_.append(root)
        self.n_features_ = d
        return self

    def soft_scores(self, X) -> np.ndarray:
        check_is_fitted(self, "trees_")
        X = check_matrix(X)
        if X.shape[1] != self.n_features_:
            raise ValueError(f"expected {self.n_features_} features, got {X.shape[1]}")
        return np.mean([_node_scores(t, X) for t in self.trees_], axis=0)
