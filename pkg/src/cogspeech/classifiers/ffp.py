"""Fuzzy fingerprint classifier.

Each class gets a fingerprint: its top-k features ranked by the magnitude
of the class mean in standardized space, with linearly decaying fuzzy
memberships. A sample is classified by building its own fingerprint the
same way from its standardized feature magnitudes and comparing fuzzy-set
overlap against each class. The ranking statistic, membership decay, and
similarity are one concrete instantiation of the technique and are kept
behind this module's surface so they can be swapped.
"""

from __future__ import annotations

import numpy as np

from .base import (
    N_CLASSES,
    ScoreKind,
    SoftScoreClassifier,
    Standardizer,
    check_is_fitted,
    check_labels,
    check_matrix,
)

__all__ = ["FfpClassifier", "top_k_fingerprint"]


def top_k_fingerprint(magnitudes: np.ndarray, k: int) -> dict[int, float]:
    """Map the k largest-|magnitude| features to memberships 1 - rank/k.

    Ranks are 0-based, so memberships lie in (0, 1] and decay linearly;
    ties in magnitude resolve toward the lower feature index.
    """
    order = np.argsort(-np.abs(magnitudes), kind="stable")[:k]
    return {int(f): 1.0 - r / k for r, f in enumerate(order)}


class FfpClassifier(SoftScoreClassifier):
    """Interpretable top-k fuzzy fingerprint classification.

    Attributes (after fit):
        fingerprints_: per class, a mapping feature index -> membership.
        scaler_: train-split standardizer shared by fit and scoring.
    """

    score_kind = ScoreKind.SOFTMAX

    def __init__(self, k: int = 10):
        self.k = k

    def fit(self, X, y) -> "FfpClassifier":
        X = check_matrix(X)
        y = check_labels(y, len(X))
        if self.k < 1 or self.k > X.shape[1]:
            raise ValueError(f"k must lie in [1, {X.shape[1]}], got {self.k}")
        self.scaler_ = Standardizer().fit(X)
        Z = self.scaler_.transform(X)
        self.fingerprints_ = []
        for c in range(N_CLASSES):
            rows = Z[y == c]
            if len(rows) == 0:
                self.fingerprints_.append({})
                continue
            self.fingerprints_.append(top_k_fingerprint(rows.mean(axis=0), self.k))
        self.n_features_ = X.shape[1]
        return self

    def _similarities(self, z: np.ndarray) -> np.ndarray:
        sample = top_k_fingerprint(z, self.k)
        sims = np.zeros(N_CLASSES)
        for c, fingerprint in enumerate(self.fingerprints_):
            if not fingerprint:
                continue
            overlap = sum(
                min(mu, fingerprint[f]) for f, mu in sample.items() if f in fingerprint
            )
            sims[c] = overlap / sum(fingerprint.values())
        return sims

    def soft_scores(self, X) -> np.ndarray:
        """Fuzzy-overlap similarities normalized to sum 1 (uniform if all zero)."""
        check_is_fitted(self, "fingerprints_")
        X = check_matrix(X)
        if X.shape[1] != self.n_features_:
            raise ValueError(f"expected {self.n_features_} features, got {X.shape[1]}")
        Z = self.scaler_.transform(X)
        out = np.empty((len(Z), N_CLASSES))
        for i, z in enumerate(Z):
            sims = self._similarities(z)
            total = sims.sum()
            out[i] = sims / total if total > 0 else np.full(N_CLASSES, 1.0 / N_CLASSES)
        return out
