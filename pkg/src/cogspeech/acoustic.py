"""Pause/rhythm features from VAD output, plus embedding ingestion and PCA.

Pauses are internal gaps only: leading and trailing silence is
protocol-driven rather than subject behavior, so it never counts as a
pause. Neural embeddings (speaker or paralinguistic) arrive precomputed
as little-endian float32 files or two-column CSVs; this module only
loads, concatenates, and reduces them.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass
from pathlib import Path

import numpy as np
from sklearn.base import BaseEstimator, TransformerMixin

from .corpus import TaskKind
from .dsp import VadSegmentation

__all__ = [
    "PauseFeatures",
    "EmbeddingVector",
    "PAUSE_FEATURE_NAMES",
    "EMBEDDING_SOURCES",
    "pause_features",
    "load_embedding",
    "concat_embeddings",
    "split_concatenated",
    "PcaReducer",
]

EMBEDDING_SOURCES = ("ECAPA", "TRILLsson", "LongFormer", "other")

PAUSE_FEATURE_NAMES = (
    "total_speech_s",
    "total_pause_s",
    "n_pauses",
    "mean_pause_s",
    "std_pause_s",
    "max_pause_s",
    "pause_rate_per_min",
    "speech_pause_ratio",
    "phonation_ratio",
    "mean_speech_seg_s",
    "segs_per_min",
)


@dataclass(frozen=True)
class PauseFeatures:
    """The 11 rhythm features of one recording.

    Rates are per minute of total recording duration; ``phonation_ratio``
    is speech time over total duration; ``speech_pause_ratio`` is defined
    as 0 when there are no pauses; ``std_pause_s`` is the population
    standard deviation and 0 for fewer than two pauses.
    """

    total_speech_s: float
    total_pause_s: float
    n_pauses: int
    mean_pause_s: float
    std_pause_s: float
    max_pause_s: float
    pause_rate_per_min: float
    speech_pause_ratio: float
    phonation_ratio: float
    mean_speech_seg_s: float
    segs_per_min: float

    def as_vector(self) -> np.ndarray:
        return np.array([getattr(self, name) for name in PAUSE_FEATURE_NAMES], dtype=np.float64)


def _normalize_intervals(intervals) -> list[tuple[float, float]]:
    """Sort and merge touching or overlapping intervals."""
    merged: list[tuple[float, float]] = []
    for start, end in sorted(intervals):
        if merged and start <= merged[-1][1]:
            merged[-1] = (merged[-1][0], max(merged[-1][1], end))
        else:
            merged.append((start, end))
    return merged


def pause_features(seg: VadSegmentation) -> PauseFeatures:
    """Compute the 11 pause/rhythm features from a VAD segmentation.

    Raises:
        ValueError: zero total duration.
    """
    duration = seg.total_duration_s
    if duration <= 0:
        raise ValueError("total duration must be positive")
    intervals = _normalize_intervals(seg.speech_intervals)
    if not intervals:
        return PauseFeatures(0.0, 0.0, 0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0)

    seg_lengths = np.array([end - start for start, end in intervals])
    gaps = np.array([intervals[i + 1][0] - intervals[i][1] for i in range(len(intervals) - 1)])
    total_speech = float(seg_lengths.sum())
    total_pause = float(gaps.sum())
    minutes = duration / 60.0
    return PauseFeatures(
        total_speech_s=total_speech,
        total_pause_s=total_pause,
        n_pauses=len(gaps),
        mean_pause_s=float(gaps.mean()) if len(gaps) else 0.0,
        std_pause_s=float(gaps.std()) if len(gaps) >= 2 else 0.0,
        max_pause_s=float(gaps.max()) if len(gaps) else 0.0,
        pause_rate_per_min=len(gaps) / minutes,
        speech_pause_ratio=total_speech / total_pause if total_pause > 0 else 0.0,
        phonation_ratio=total_speech / duration,
        mean_speech_seg_s=total_speech / len(intervals),
        segs_per_min=len(intervals) / minutes,
    )


@dataclass(frozen=True)
class EmbeddingVector:
    """A precomputed neural representation with source and task tags."""

    values: np.ndarray
    source: str
    task: TaskKind | str  # a TaskKind, or "ALL" after concatenation

    def __post_init__(self) -> None:
        values = np.asarray(self.values, dtype=np.float64)
        if values.ndim != 1 or values.size == 0:
            raise ValueError(f"embedding must be a non-empty vector, got shape {values.shape}")
        if not np.all(np.isfinite(values)):
            raise ValueError("embedding contains non-finite values")
        if self.source not in EMBEDDING_SOURCES:
            raise ValueError(f"unknown embedding source {self.source!r}")
        object.__setattr__(self, "values", values)

    @property
    def dim(self) -> int:
        return int(self.values.size)


def load_embedding(
    path: Path | str,
    expected_dim: int | None = None,
    source: str = "other",
    task: TaskKind | str = "ALL",
) -> EmbeddingVector:
    """Load one embedding file.

    ``.f32`` files hold little-endian 32-bit floats; anything else is
    parsed as a header-less ``index,value`` CSV.

    Raises:
        FileNotFoundError: missing file.
        ValueError: dimension mismatch against ``expected_dim``, or a
            non-finite value in the file.
    """
    path = Path(path)
    if not path.exists():
        raise FileNotFoundError(f"embedding file not found: {path}")
    if path.suffix == ".f32":
        values = np.frombuffer(path.read_bytes(), dtype="<f4").astype(np.float64)
    else:
        with open(path, newline="", encoding="utf-8") as fh:
            pairs = [(int(row[0]), float(row[1])) for row in csv.reader(fh) if row]
        values = np.array([v for _, v in sorted(pairs)], dtype=np.float64)
    if expected_dim is not None and values.size != expected_dim:
        raise ValueError(f"{path}: expected {expected_dim} values, got {values.size}")
    if not np.all(np.isfinite(values)):
        raise ValueError(f"{path}: embedding contains non-finite values")
    return EmbeddingVector(values=values, source=source, task=task)


_CONCAT_ORDER = (TaskKind.CTD, TaskKind.PFT, TaskKind.SFT)


def concat_embeddings(per_task: dict[TaskKind, EmbeddingVector]) -> EmbeddingVector:
    """Concatenate one source's per-task embeddings in CTD, PFT, SFT order.

    Raises:
        ValueError: a task is missing, or the vectors mix sources.
    """
    missing = [t.value for t in _CONCAT_ORDER if t not in per_task]
    if missing:
        raise ValueError(f"missing task embedding(s): {', '.join(missing)}")
    sources = {per_task[t].source for t in _CONCAT_ORDER}
    if len(sources) != 1:
        raise ValueError(f"cannot concatenate mixed sources: {sorted(sources)}")
    values = np.concatenate([per_task[t].values for t in _CONCAT_ORDER])
    return EmbeddingVector(values=values, source=sources.pop(), task="ALL")


def split_concatenated(vec: EmbeddingVector, dims: dict[TaskKind, int]) -> dict[TaskKind, EmbeddingVector]:
    """Invert :func:`concat_embeddings` given the per-task dimensions."""
    if sum(dims[t] for t in _CONCAT_ORDER) != vec.dim:
        raise ValueError("per-task dimensions do not sum to the concatenated dimension")
    out = {}
    offset = 0
    for task in _CONCAT_ORDER:
        out[task] = EmbeddingVector(
            values=vec.values[offset : offset + dims[task]], source=vec.source, task=task
        )
        offset += dims[task]
    return out


class PcaReducer(BaseEstimator, TransformerMixin):
    """Principal component reduction via covariance eigendecomposition.

    Components are the top eigenvectors of the mean-centered population
    covariance, with a deterministic sign convention: the largest-magnitude
    entry of each component is positive. ``target_dim=None`` defaults to
    ``min(50, n_samples - 1, n_features)`` at fit time.

    Attributes (after fit):
        mean_: per-feature training mean, shape (d,).
        components_: orthonormal rows, shape (target_dim, d).
        explained_variance_: eigenvalues, non-increasing, shape (target_dim,).
        all_eigenvalues_: full spectrum, for variance accounting.
    """

    def __init__(self, target_dim: int | None = None):
        self.target_dim = target_dim

    def fit(self, X, y=None) -> "PcaReducer":
        X = np.asarray(X, dtype=np.float64)
        if X.ndim != 2 or X.shape[0] < 2:
            raise ValueError(f"need a 2-D matrix with n >= 2 rows, got shape {X.shape}")
        n, d = X.shape
        target = self.target_dim if self.target_dim is not None else min(50, n - 1, d)
        if target < 1 or target > min(n - 1, d):
            raise ValueError(f"target_dim {target} outside [1, min(n - 1, d)] = [1, {min(n - 1, d)}]")

        self.mean_ = X.mean(axis=0)
        centered = X - self.mean_
        cov = centered.T @ centered / n
        eigvals, eigvecs = np.linalg.eigh(cov)
        order = np.argsort(eigvals)[::-1]
        eigvals = np.maximum(eigvals[order], 0.0)
        components = eigvecs[:, order].T[:target]
        # Sign convention: flip each component so its largest-|entry| is positive.
        for row in components:
            pivot = np.argmax(np.abs(row))
            if row[pivot] < 0:
                row *= -1.0
        self.components_ = components
        self.explained_variance_ = eigvals[:target]
        self.all_eigenvalues_ = eigvals
        self.n_samples_ = n
        return self

    def transform(self, X) -> np.ndarray:
        X = np.asarray(X, dtype=np.float64)
        squeeze = X.ndim == 1
        if squeeze:
            X = X[None, :]
        if X.shape[1] != self.mean_.size:
            raise ValueError(f"expected {self.mean_.size} features, got {X.shape[1]}")
        Z = (X - self.mean_) @ self.components_.T
        return Z[0] if squeeze else Z

    def inverse_transform(self, Z) -> np.ndarray:
        Z = np.asarray(Z, dtype=np.float64)
        squeeze = Z.ndim == 1
        if squeeze:
            Z = Z[None, :]
        X = Z @ self.components_ + self.mean_
        return X[0] if squeeze else X
