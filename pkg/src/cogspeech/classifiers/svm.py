"""Linear one-vs-rest SVM trained by seeded per-sample subgradient descent.

The per-class objective is the standard primal, 0.5 * ||w||^2 plus C times
the summed hinge loss, minimized over epoch-ordered passes whose sample
order is reshuffled each epoch with a seeded generator. Features are
standardized with train statistics before training and scoring, and
scores are signed distances to each class hyperplane, which is what the
late-fusion stage consumes.
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

__all__ = ["LinearSvmClassifier", "svm_objective"]


def svm_objective(W: np.ndarray, b: np.ndarray, X: np.ndarray, Y: np.ndarray, C: float) -> float:
    """Summed one-vs-rest primal objective: sum_c 0.5||w_c||^2 + C * hinge_c.

    ``Y`` holds one-vs-rest targets in {-1, +1}, shape (n_classes, n).
    """
    margins = Y * (W @ X.T + b[:, None])
    hinge = np.maximum(0.0, 1.0 - margins).sum()
    return float(0.5 * np.sum(W * W) + C * hinge)


class LinearSvmClassifier(SoftScoreClassifier):
    """Linear SVM, one binary machine per class.

    Args:
        C: hinge-loss weight in the primal objective.
        epochs: full passes over the training data.
        lr0: initial step size; steps decay as ``lr0 / (1 + t / n)`` over
            global step count ``t``.
        seed: generator seed for the per-epoch sample shuffles.

    Attributes (after fit):
        coef_: per-class weight vectors, shape (3, d), in standardized space.
        intercept_: per-class biases, shape (3,).
        scaler_: the train-split standardizer.
        objective_history_: summed primal objective per epoch (epochs + 1
            entries, the first at initialization).
    """

    score_kind = ScoreKind.DISTANCE

    def __init__(self, C: float = 0.1, epochs: int = 200, lr0: float = 1.0, seed: int = 0):
        self.C = C
        self.epochs = epochs
        self.lr0 = lr0
        self.seed = seed

    def fit(self, X, y) -> "LinearSvmClassifier":
        X = check_matrix(X)
        y = check_labels(y, len(X))
        if len(X) < 2:
            raise ValueError("need at least 2 training rows")
        if len(np.unique(y)) < 2:
            raise ValueError("training data contains a single class")
        if self.C <= 0:
            raise ValueError(f"C must be positive, got {self.C}")

        self.scaler_ = Standardizer().fit(X)
        Z = self.scaler_.transform(X)
        n, d = Z.shape
        Y = np.where(np.arange(N_CLASSES)[:, None] == y[None, :], 1.0, -1.0)

        rng = np.random.default_rng(self.seed)
        W = np.zeros((N_CLASSES, d))
        b = np.zeros(N_CLASSES)
        history = [svm_objective(W, b, Z, Y, self.C)]
        t = 0
        for _ in range(self.epochs):
            for i in rng.permutation(n):
                lr = self.lr0 / (1.0 + t / n)
                t += 1
                x_i = Z[i]
                active = Y[:, i] * (W @ x_i + b) < 1.0
                grad_W = W / n
                grad_W[active] -= self.C * Y[active, i, None] * x_i
                W -= lr * grad_W
                b[active] += lr * self.C * Y[active, i]
            history.append(svm_objective(W, b, Z, Y, self.C))

        self.coef_ = W
        self.intercept_ = b
        self.objective_history_ = np.array(history)
        return self

    def soft_scores(self, X) -> np.ndarray:
        """Signed distances (w.x + b) / ||w|| per class; 0 when ||w|| = 0."""
        check_is_fitted(self, "coef_")
        X = check_matrix(X)
        if X.shape[1] != self.coef_.shape[1]:
            raise ValueError(f"expected {self.coef_.shape[1]} features, got {X.shape[1]}")
        Z = self.scaler_.transform(X)
        norms = np.linalg.norm(self.coef_, axis=1)
        raw = Z @ self.coef_.T + self.intercept_
        with np.errstate(invalid="ignore"):
            scores = np.where(norms[None, :] > 0, raw / np.where(norms > 0, norms, 1.0), 0.0)
        return scores
