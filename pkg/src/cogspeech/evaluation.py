"""Metrics and the cross-validation runner.

The headline metric is the unweighted average F1 (UAF1) over the three
classes, reported in percent. Any 0/0 in precision, recall, or F1 is
defined as 0, which makes "F1 of zero for the dementia class" a
first-class, representable outcome rather than a NaN.

``run_cv`` produces the contract consumed by the fusion stage: one
out-of-fold soft decision per train subject (from the model that did not
see that subject's fold) and one averaged soft decision per dev subject
(mean of the k fold models' scores).
"""

from __future__ import annotations

import csv
from dataclasses import dataclass
from pathlib import Path
from typing import Callable

import numpy as np

from .classifiers import ScoreKind, SoftDecision, SoftScoreClassifier
from .corpus import ClassLabel, FoldPlan

__all__ = [
    "ConfusionMatrix",
    "MetricReport",
    "CvResult",
    "MissingFeaturesError",
    "confusion",
    "metrics",
    "metrics_from_predictions",
    "run_cv",
    "save_cv_result",
    "load_score_rows",
    "SCORE_CSV_HEADER",
]

N_CLASSES = 3


@dataclass(frozen=True)
class ConfusionMatrix:
    """3x3 counts, rows = true class, columns = predicted class."""

    counts: np.ndarray

    def __post_init__(self) -> None:
        counts = np.asarray(self.counts, dtype=np.int64)
        if counts.shape != (N_CLASSES, N_CLASSES) or (counts < 0).any():
            raise ValueError(f"expected a non-negative 3x3 count matrix, got\n{counts}")
        object.__setattr__(self, "counts", counts)

    @property
    def total(self) -> int:
        return int(self.counts.sum())


@dataclass(frozen=True)
class MetricReport:
    """Per-class precision/recall/F1 and their unweighted mean, in percent."""

    uaf1: float
    f1: tuple[float, float, float]
    precision: tuple[float, float, float]
    recall: tuple[float, float, float]

    def f1_of(self, label: ClassLabel) -> float:
        return self.f1[int(label)]


def confusion(y_true, y_pred) -> ConfusionMatrix:
    """Count (true, predicted) pairs.

    Raises:
        ValueError: length mismatch or empty input.
    """
    y_true = np.asarray(y_true, dtype=np.int64)
    y_pred = np.asarray(y_pred, dtype=np.int64)
    if y_true.shape != y_pred.shape or y_true.ndim != 1:
        raise ValueError(f"shape mismatch: {y_true.shape} vs {y_pred.shape}")
    if len(y_true) == 0:
        raise ValueError("cannot build a confusion matrix from zero pairs")
    counts = np.zeros((N_CLASSES, N_CLASSES), dtype=np.int64)
    for t, p in zip(y_true, y_pred):
        counts[t, p] += 1
    return ConfusionMatrix(counts=counts)


def _safe_div(num: float, den: float) -> float:
    return num / den if den > 0 else 0.0


def metrics(cm: ConfusionMatrix) -> MetricReport:
    """Per-class F1 with the defined-0 rule, and UAF1 as their mean."""
    counts = cm.counts
    precision, recall, f1 = [], [], []
    for c in range(N_CLASSES):
        tp = counts[c, c]
        p = _safe_div(float(tp), float(counts[:, c].sum()))
        r = _safe_div(float(tp), float(counts[c, :].sum()))
        precision.append(100.0 * p)
        recall.append(100.0 * r)
        f1.append(100.0 * _safe_div(2.0 * p * r, p + r))
    return MetricReport(
        uaf1=sum(f1) / N_CLASSES,
        f1=tuple(f1),
        precision=tuple(precision),
        recall=tuple(recall),
    )


def metrics_from_predictions(y_true, y_pred) -> MetricReport:
    return metrics(confusion(y_true, y_pred))


class MissingFeaturesError(KeyError):
    """Raised when subjects lack feature vectors and exclusion is not allowed."""

    def __init__(self, subject_ids: list[str]):
        super().__init__(f"missing features for subjects: {', '.join(sorted(subject_ids))}")
        self.subject_ids = sorted(subject_ids)


@dataclass
class CvResult:
    """Out-of-fold train scores and fold-averaged dev scores for one system."""

    system_id: str
    oof_scores: dict[str, SoftDecision]
    oof_fold: dict[str, int]
    dev_scores: dict[str, SoftDecision]
    train_metrics: MetricReport
    dev_metrics: MetricReport | None


def run_cv(
    system_id: str,
    make_classifier: Callable[[], SoftScoreClassifier],
    train_features: dict[str, np.ndarray],
    train_labels: dict[str, int],
    folds: FoldPlan,
    dev_features: dict[str, np.ndarray],
    dev_labels: dict[str, int] | None = None,
    allow_missing: bool = False,
) -> CvResult:
    """Five-fold (or k-fold) cross-validation with out-of-fold scoring.

    For each fold f a fresh classifier is trained on the other folds, then
    scores fold f (giving each train subject exactly one out-of-fold soft
    decision) and the dev set. Dev scores are the arithmetic mean of the k
    fold models' score vectors, which preserves the score kind and, for
    probability-like kinds, the sum-to-1 property.

    Args:
        allow_missing: when True, subjects without features are dropped;
            otherwise MissingFeaturesError lists them.
    """
    missing = [s for s in folds.assignment if s not in train_features]
    if dev_labels is not None:
        missing += [s for s in dev_labels if s not in dev_features]
    if missing:
        if not allow_missing:
            raise MissingFeaturesError(missing)
        missing_set = set(missing)
    else:
        missing_set = set()

    assigned = {s: f for s, f in folds.assignment.items() if s not in missing_set}
    dev_ids = sorted(dev_features)

    oof_scores: dict[str, SoftDecision] = {}
    oof_fold: dict[str, int] = {}
    dev_sum: np.ndarray | None = None
    kind: ScoreKind | None = None

    for fold in range(folds.k):
        train_ids = sorted(s for s, f in assigned.items() if f != fold)
        held_ids = sorted(s for s, f in assigned.items() if f == fold)
        X = np.vstack([train_features[s] for s in train_ids])
        y = np.array([train_labels[s] for s in train_ids])
        model = make_classifier().fit(X, y)
        kind = model.score_kind

        if held_ids:
            held_scores = model.soft_scores(np.vstack([train_features[s] for s in held_ids]))
            for sid, row in zip(held_ids, held_scores):
                oof_scores[sid] = SoftDecision(scores=row, kind=kind)
                oof_fold[sid] = fold
        if dev_ids:
            dev_mat = model.soft_scores(np.vstack([dev_features[s] for s in dev_ids]))
            dev_sum = dev_mat if dev_sum is None else dev_sum + dev_mat

    dev_scores: dict[str, SoftDecision] = {}
    if dev_ids and dev_sum is not None:
        for sid, row in zip(dev_ids, dev_sum / folds.k):
            dev_scores[sid] = SoftDecision(scores=row, kind=kind)

    train_ids = sorted(oof_scores)
    train_metrics = metrics_from_predictions(
        [train_labels[s] for s in train_ids], [oof_scores[s].prediction for s in train_ids]
    )
    dev_metrics = None
    if dev_labels:
        eval_ids = sorted(s for s in dev_scores if s in dev_labels)
        dev_metrics = metrics_from_predictions(
            [dev_labels[s] for s in eval_ids], [dev_scores[s].prediction for s in eval_ids]
        )
    return CvResult(
        system_id=system_id,
        oof_scores=oof_scores,
        oof_fold=oof_fold,
        dev_scores=dev_scores,
        train_metrics=train_metrics,
        dev_metrics=dev_metrics,
    )


SCORE_CSV_HEADER = [
    "system_id",
    "subject_id",
    "split",
    "fold",
    "score_hc",
    "score_mci",
    "score_dem",
    "kind",
]


def save_cv_result(result: CvResult, path: Path | str) -> None:
    """Persist a CvResult as the score CSV consumed by the fusion stage.

    Train rows carry the out-of-fold index; averaged dev rows use fold -1.
    """
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(SCORE_CSV_HEADER)
        for sid in sorted(result.oof_scores):
            d = result.oof_scores[sid]
            writer.writerow(
                [result.system_id, sid, "Train", result.oof_fold[sid]]
                + [repr(float(v)) for v in d.scores]
                + [d.kind.value]
            )
        for sid in sorted(result.dev_scores):
            d = result.dev_scores[sid]
            writer.writerow(
                [result.system_id, sid, "Dev", -1]
                + [repr(float(v)) for v in d.scores]
                + [d.kind.value]
            )


def load_score_rows(path: Path | str):
    """Read a score CSV back as (system_id, subject_id, split, fold, scores, kind) rows."""
    rows = []
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header != SCORE_CSV_HEADER:
            raise ValueError(f"{path}: unexpected score CSV header {header}")
        for row in reader:
            if not row:
                continue
            rows.append(
                (
                    row[0],
                    row[1],
                    row[2],
                    int(row[3]),
                    np.array([float(row[4]), float(row[5]), float(row[6])]),
                    ScoreKind(row[7]),
                )
            )
    return rows
