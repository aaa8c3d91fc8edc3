"""Multinomial logistic regression by full-batch gradient descent.

This is both a base classifier and the meta-model of the late-fusion
stage. Weights start at zero (so the initial per-sample loss on balanced
data is exactly ln 3), descend the L2-regularized mean negative
log-likelihood, and the bias column is not regularized. The loss and
gradient are exposed as module functions so tests can check the analytic
gradient against finite differences.
"""

from __future__ import annotations

import numpy as np

from .base import (
    N_CLASSES,
    ScoreKind,
    SoftScoreClassifier,
    check_is_fitted,
    check_labels,
    check_matrix,
)

__all__ = [
    "SoftmaxRegression",
    "DivergenceError",
    "softmax_probs",
    "softmax_loss",
    "softmax_gradient",
]


class DivergenceError(RuntimeError):
    """Raised when training produces a non-finite loss."""

    def __init__(self, iteration: int):
        super().__init__(f"non-finite loss at iteration {iteration}; reduce the learning rate")
        self.iteration = iteration


def softmax_probs(logits: np.ndarray) -> np.ndarray:
    """Row-wise softmax, shifted by the row max for numerical stability."""
    shifted = logits - logits.max(axis=1, keepdims=True)
    exp = np.exp(shifted)
    return exp / exp.sum(axis=1, keepdims=True)


def _augment(X: np.ndarray) -> np.ndarray:
    return np.hstack([X, np.ones((len(X), 1))])


def softmax_loss(W: np.ndarray, X: np.ndarray, y: np.ndarray, l2: float) -> float:
    """Mean negative log-likelihood plus (l2/2) * ||W without bias||^2.

    ``W`` has shape (n_classes, d + 1) with the bias in the last column;
    ``X`` is unaugmented.
    """
    probs = softmax_probs(_augment(X) @ W.T)
    nll = -np.mean(np.log(np.maximum(probs[np.arange(len(y)), y], 1e-300)))
    return float(nll + 0.5 * l2 * np.sum(W[:, :-1] ** 2))


def softmax_gradient(W: np.ndarray, X: np.ndarray, y: np.ndarray, l2: float) -> np.ndarray:
    """Analytic gradient of :func:`softmax_loss` with respect to ``W``."""
    Xa = _augment(X)
    probs = softmax_probs(Xa @ W.T)
    probs[np.arange(len(y)), y] -= 1.0
    grad = probs.T @ Xa / len(y)
    grad[:, :-1] += l2 * W[:, :-1]
    return grad


class SoftmaxRegression(SoftScoreClassifier):
    """Zero-initialized, full-batch gradient descent softmax classifier.

    Training is deterministic: the ``seed`` parameter exists for interface
    uniformity with the other classifiers but zero initialization makes it
    inert.

    Attributes (after fit):
        weights_: shape (3, d + 1), bias in the last column.
        loss_history_: loss before each update plus the final loss
            (iters + 1 entries).
    """

    score_kind = ScoreKind.SOFTMAX

    def __init__(self, l2: float = 1e-3, lr: float = 0.1, iters: int = 2000, seed: int = 0):
        self.l2 = l2
        self.lr = lr
        self.iters = iters
        self.seed = seed

    def fit(self, X, y) -> "SoftmaxRegression":
        X = check_matrix(X)
        y = check_labels(y, len(X))
        if self.iters < 1:
            raise ValueError(f"iters must be >= 1, got {self.iters}")
        if self.l2 < 0:
            raise ValueError(f"l2 must be >= 0, got {self.l2}")

        Xa = _augment(X)
        n = len(y)
        rows = np.arange(n)
        W = np.zeros((N_CLASSES, X.shape[1] + 1))
        history = np.empty(self.iters + 1)
        # Non-finite intermediates are detected and reported via DivergenceError.
        with np.errstate(over="ignore", invalid="ignore"):
            for t in range(self.iters + 1):
                # One stable softmax per iteration feeds loss and gradient.
                logits = Xa @ W.T
                shifted = logits - logits.max(axis=1, keepdims=True)
                exp = np.exp(shifted)
                denom = exp.sum(axis=1)
                loss = float(
                    np.mean(np.log(denom) - shifted[rows, y])
                    + 0.5 * self.l2 * np.sum(W[:, :-1] ** 2)
                )
                if not np.isfinite(loss):
                    raise DivergenceError(t)
                history[t] = loss
                if t == self.iters:
                    break
                probs = exp / denom[:, None]
                probs[rows, y] -= 1.0
                grad = probs.T @ Xa / n
                grad[:, :-1] += self.l2 * W[:, :-1]
                W -= self.lr * grad

        self.weights_ = W
        self.loss_history_ = history
        return self

    def soft_scores(self, X) -> np.ndarray:
        check_is_fitted(self, "weights_")
        X = check_matrix(X)
        if X.shape[1] != self.weights_.shape[1] - 1:
            raise ValueError(f"expected {self.weights_.shape[1] - 1} features, got {X.shape[1]}")
        return softmax_probs(_augment(X) @ self.weights_.T)
