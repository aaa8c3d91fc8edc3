"""Shared classifier types: soft decisions, datasets, validation, scaling.

Every classifier in this package is an sklearn-style estimator (``fit``
returns self, hyperparameters live on ``__init__``, fitted state carries a
trailing underscore) that emits per-class soft decisions: a 3-score vector
tagged with its kind (hyperplane distance, probability, or softmax).
"""

from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum

import numpy as np
from sklearn.base import BaseEstimator, ClassifierMixin

__all__ = [
    "ScoreKind",
    "SoftDecision",
    "Dataset",
    "Standardizer",
    "SoftScoreClassifier",
    "check_matrix",
    "check_labels",
    "check_vector",
    "check_is_fitted",
    "N_CLASSES",
    "STD_FLOOR",
]

N_CLASSES = 3
STD_FLOOR = 1e-12


class ScoreKind(str, Enum):
    DISTANCE = "distance"
    PROBABILITY = "probability"
    SOFTMAX = "softmax"


@dataclass(frozen=True)
class SoftDecision:
    """Per-class scores ordered (HC, MCI, Dementia) plus a kind tag.

    Probability and softmax kinds are non-negative and sum to 1 within
    1e-9. The predicted class is the argmax, with ties broken toward the
    lowest class index.
    """

    scores: np.ndarray
    kind: ScoreKind

    def __post_init__(self) -> None:
        scores = np.asarray(self.scores, dtype=np.float64)
        if scores.shape != (N_CLASSES,):
            raise ValueError(f"expected {N_CLASSES} scores, got shape {scores.shape}")
        if not np.all(np.isfinite(scores)):
            raise ValueError("scores contain non-finite values")
        if self.kind in (ScoreKind.PROBABILITY, ScoreKind.SOFTMAX):
            if scores.min() < -1e-12 or abs(scores.sum() - 1.0) > 1e-9:
                raise ValueError(f"{self.kind.value} scores must be a distribution, got {scores}")
        object.__setattr__(self, "scores", scores)

    @property
    def prediction(self) -> int:
        return int(np.argmax(self.scores))


@dataclass
class Dataset:
    """Feature matrix with integer class labels and feature names."""

    x: np.ndarray
    y: np.ndarray
    feature_names: list[str] = field(default_factory=list)

    def __post_init__(self) -> None:
        self.x = check_matrix(self.x, "x")
        self.y = check_labels(self.y, len(self.x))
        if not self.feature_names:
            self.feature_names = [f"f{i}" for i in range(self.x.shape[1])]
        elif len(self.feature_names) != self.x.shape[1]:
            raise ValueError("feature_names length does not match feature count")


def check_matrix(x, name: str = "X") -> np.ndarray:
    x = np.asarray(x, dtype=np.float64)
    if x.ndim != 2:
        raise ValueError(f"{name} must be 2-D, got shape {x.shape}")
    if not np.all(np.isfinite(x)):
        raise ValueError(f"{name} contains non-finite values")
    return x


def check_vector(x, dim: int, name: str = "x") -> np.ndarray:
    x = np.asarray(x, dtype=np.float64)
    if x.shape != (dim,):
        raise ValueError(f"{name} must have shape ({dim},), got {x.shape}")
    if not np.all(np.isfinite(x)):
        raise ValueError(f"{name} contains non-finite values")
    return x


def check_labels(y, n_rows: int, n_classes: int = N_CLASSES) -> np.ndarray:
    y = np.asarray(y)
    if y.shape != (n_rows,):
        raise ValueError(f"labels must have shape ({n_rows},), got {y.shape}")
    y = y.astype(np.int64)
    if y.size and (y.min() < 0 or y.max() >= n_classes):
        raise ValueError(f"labels must lie in [0, {n_classes}), got range [{y.min()}, {y.max()}]")
    return y


def check_is_fitted(estimator, attribute: str) -> None:
    if not hasattr(estimator, attribute):
        raise RuntimeError(f"{type(estimator).__name__} is not fitted; call fit first")


class Standardizer:
    """Per-feature train-split mean/std scaling with the std floored at 1e-12."""

    def fit(self, x: np.ndarray) -> "Standardizer":
        x = check_matrix(x)
        self.mean_ = x.mean(axis=0)
        self.scale_ = np.maximum(x.std(axis=0), STD_FLOOR)
        return self

    def transform(self, x: np.ndarray) -> np.ndarray:
        x = np.asarray(x, dtype=np.float64)
        return (x - self.mean_) / self.scale_

    def fit_transform(self, x: np.ndarray) -> np.ndarray:
        return self.fit(x).transform(x)


class SoftScoreClassifier(BaseEstimator, ClassifierMixin):
    """Base class tying ``soft_scores`` matrices to per-row soft decisions."""

    score_kind: ScoreKind

    def soft_scores(self, X) -> np.ndarray:
        """Per-class score matrix of shape (n_rows, 3)."""
        raise NotImplementedError

    def soft_decision(self, x) -> SoftDecision:
        scores = self.soft_scores(np.asarray(x, dtype=np.float64)[None, :])[0]
        return SoftDecision(scores=scores, kind=self.score_kind)

    def soft_decisions(self, X) -> list[SoftDecision]:
        return [SoftDecision(scores=row, kind=self.score_kind) for row in self.soft_scores(X)]

    def predict(self, X) -> np.ndarray:
        return np.argmax(self.soft_scores(X), axis=1)


class ConstantClassifier(SoftScoreClassifier):
    """Baseline that always predicts one class with probability 1."""

    score_kind = ScoreKind.PROBABILITY

    def __init__(self, target: int = 0):
        self.target = target

    def fit(self, X, y) -> "ConstantClassifier":
        X = check_matrix(X)
        check_labels(y, len(X))
        if not 0 <= self.target < N_CLASSES:
            raise ValueError(f"target class must lie in [0, {N_CLASSES}), got {self.target}")
        self.n_features_ = X.shape[1]
        return self

    def soft_scores(self, X) -> np.ndarray:
        check_is_fitted(self, "n_features_")
        X = check_matrix(X)
        out = np.zeros((len(X), N_CLASSES))
        out[:, self.target] = 1.0
        return out
