"""Late fusion of single systems and exhaustive ensemble search.

Each candidate subset of systems is fused by a multinomial logistic
regression trained on the concatenated out-of-fold score columns of its
members (z-scored per column first, since raw hyperplane distances would
otherwise dominate probability-scaled columns). The fused model is then
applied to the members' averaged dev scores. Candidates are ranked by the
smaller of train and dev UAF1, so a winning ensemble must generalize, and
the selection filter additionally demands a non-zero dementia F1 on dev.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass
from itertools import combinations
from pathlib import Path

import numpy as np

from .classifiers import ScoreKind, SoftDecision, SoftmaxRegression
from .classifiers.base import STD_FLOOR
from .evaluation import MetricReport, load_score_rows, metrics_from_predictions

__all__ = [
    "SystemOutput",
    "FusionModel",
    "FusionHyper",
    "EnsembleCandidate",
    "SelectionCriteria",
    "CoverageError",
    "enumerate_subsets",
    "fuse_train",
    "fuse_predict",
    "search",
    "select",
    "frequency",
    "load_system_output",
    "save_candidates",
    "save_frequency",
]


@dataclass
class SystemOutput:
    """One system's out-of-fold train scores and averaged dev scores."""

    system_id: str
    oof: dict[str, np.ndarray]
    dev: dict[str, np.ndarray]
    kind: ScoreKind

    def __post_init__(self) -> None:
        for table in (self.oof, self.dev):
            for sid, scores in table.items():
                scores = np.asarray(scores, dtype=np.float64)
                if scores.shape != (3,) or not np.all(np.isfinite(scores)):
                    raise ValueError(f"{self.system_id}/{sid}: bad score triple {scores}")
                table[sid] = scores


def load_system_output(path: Path | str) -> SystemOutput:
    """Load a SystemOutput from the evaluation module's score CSV."""
    rows = load_score_rows(path)
    if not rows:
        raise ValueError(f"{path}: empty score file")
    system_id = rows[0][0]
    oof, dev = {}, {}
    kind = rows[0][5]
    for sys_id, sid, split, _fold, scores, row_kind in rows:
        if sys_id != system_id:
            raise ValueError(f"{path}: mixed system ids {system_id!r} and {sys_id!r}")
        (oof if split == "Train" else dev)[sid] = scores
        kind = row_kind
    return SystemOutput(system_id=system_id, oof=oof, dev=dev, kind=kind)


class CoverageError(ValueError):
    """Raised when members being fused do not cover the same subjects."""


@dataclass(frozen=True)
class FusionHyper:
    """Meta-model hyperparameters (small fusion problems converge well here)."""

    l2: float = 1e-3
    lr: float = 0.1
    iters: int = 2000


@dataclass
class FusionModel:
    """Softmax meta-model over z-scored, concatenated member score columns."""

    member_ids: tuple[str, ...]
    col_mean: np.ndarray
    col_scale: np.ndarray
    model: SoftmaxRegression

    @property
    def input_dim(self) -> int:
        return 3 * len(self.member_ids)

    def to_dict(self) -> dict:
        return {
            "format": "cogspeech-fusion",
            "version": 1,
            "member_ids": list(self.member_ids),
            "col_mean": self.col_mean.tolist(),
            "col_scale": self.col_scale.tolist(),
            "hyper": self.model.get_params(),
            "weights": self.model.weights_.tolist(),
        }

    @classmethod
    def from_dict(cls, payload: dict) -> "FusionModel":
        if payload.get("format") != "cogspeech-fusion" or payload.get("version") != 1:
            raise ValueError("not a version-1 cogspeech-fusion payload")
        model = SoftmaxRegression(**payload["hyper"])
        model.weights_ = np.array(payload["weights"])
        return cls(
            member_ids=tuple(payload["member_ids"]),
            col_mean=np.array(payload["col_mean"]),
            col_scale=np.array(payload["col_scale"]),
            model=model,
        )


def _stack_rows(members: list[SystemOutput], table: str, subject_ids: list[str]) -> np.ndarray:
    blocks = []
    for m in members:
        scores = getattr(m, table)
        blocks.append(np.vstack([scores[sid] for sid in subject_ids]))
    return np.hstack(blocks)


def _common_ids(members: list[SystemOutput], table: str) -> list[str]:
    id_sets = [set(getattr(m, table)) for m in members]
    common = set.intersection(*id_sets)
    union = set.union(*id_sets)
    if common != union:
        examples = sorted(union - common)[:5]
        raise CoverageError(
            f"{table} subject coverage differs across members "
            f"{[m.system_id for m in members]}; e.g. {examples}"
        )
    return sorted(common)


def fuse_train(
    members: list[SystemOutput],
    train_labels: dict[str, int],
    hyper: FusionHyper = FusionHyper(),
) -> FusionModel:
    """Fit the fusion meta-model on the members' out-of-fold scores.

    Raises:
        CoverageError: a subject present in one member is absent in another.
        ValueError: fewer than 2 members.
    """
    if len(members) < 2:
        raise ValueError("fusion needs at least 2 member systems")
    ids = _common_ids(members, "oof")
    X = _stack_rows(members, "oof", ids)
    y = np.array([train_labels[sid] for sid in ids])
    col_mean = X.mean(axis=0)
    col_scale = np.maximum(X.std(axis=0), STD_FLOOR)
    model = SoftmaxRegression(l2=hyper.l2, lr=hyper.lr, iters=hyper.iters)
    model.fit((X - col_mean) / col_scale, y)
    return FusionModel(
        member_ids=tuple(m.system_id for m in members),
        col_mean=col_mean,
        col_scale=col_scale,
        model=model,
    )


def fuse_predict(
    fusion: FusionModel, members: list[SystemOutput], table: str = "dev"
) -> dict[str, SoftDecision]:
    """Apply a fused model to the members' score tables (default: dev).

    Raises:
        ValueError: member order does not match the fused model.
    """
    if tuple(m.system_id for m in members) != fusion.member_ids:
        raise ValueError(
            f"member order {[m.system_id for m in members]} does not match "
            f"fusion model {list(fusion.member_ids)}"
        )
    ids = _common_ids(members, table)
    X = (_stack_rows(members, table, ids) - fusion.col_mean) / fusion.col_scale
    probs = fusion.model.soft_scores(X)
    return {sid: SoftDecision(scores=row, kind=ScoreKind.SOFTMAX) for sid, row in zip(ids, probs)}


def enumerate_subsets(n: int, min_size: int = 2, max_size: int = 6) -> list[tuple[int, ...]]:
    """All index subsets of sizes min_size..max_size, lexicographically ordered.

    Raises:
        ValueError: n < min_size.
    """
    if n < min_size:
        raise ValueError(f"cannot draw subsets of {min_size}+ from {n} systems")
    subsets: list[tuple[int, ...]] = []
    for size in range(min_size, min(max_size, n) + 1):
        subsets.extend(combinations(range(n), size))
    return subsets


@dataclass(frozen=True)
class SelectionCriteria:
    """Strict lower bounds on train/dev UAF1 and the dev dementia F1."""

    min_train_uaf1: float = 55.0
    min_dev_uaf1: float = 55.0
    min_dementia_f1: float = 0.0


@dataclass(frozen=True)
class EnsembleCandidate:
    """One evaluated subset of systems with its fused train/dev metrics."""

    members: tuple[str, ...]
    train_metrics: MetricReport
    dev_metrics: MetricReport

    @property
    def rank_key(self):
        balanced = min(self.train_metrics.uaf1, self.dev_metrics.uaf1)
        return (-balanced, -self.dev_metrics.uaf1, self.members)


def search(
    outputs: list[SystemOutput],
    train_labels: dict[str, int],
    dev_labels: dict[str, int],
    min_size: int = 2,
    max_size: int = 6,
    hyper: FusionHyper = FusionHyper(),
) -> list[EnsembleCandidate]:
    """Fuse and evaluate every subset of the given sizes, ranked best-first.

    Train metrics come from re-scoring the out-of-fold fusion inputs with
    the fitted meta-model; dev metrics from fusing the members' dev
    tables. The ranking key is min(train UAF1, dev UAF1) descending, with
    dev UAF1 and then lexicographic member order as tie-breaks, so results
    are deterministic.
    """
    subsets = enumerate_subsets(len(outputs), min_size, max_size)
    candidates = []
    for subset in subsets:
        members = [outputs[i] for i in subset]
        fusion = fuse_train(members, train_labels, hyper)
        train_pred = fuse_predict(fusion, members, table="oof")
        train_ids = sorted(train_pred)
        train_metrics = metrics_from_predictions(
            [train_labels[s] for s in train_ids], [train_pred[s].prediction for s in train_ids]
        )
        dev_pred = fuse_predict(fusion, members, table="dev")
        dev_ids = sorted(s for s in dev_pred if s in dev_labels)
        dev_metrics = metrics_from_predictions(
            [dev_labels[s] for s in dev_ids], [dev_pred[s].prediction for s in dev_ids]
        )
        candidates.append(
            EnsembleCandidate(
                members=tuple(outputs[i].system_id for i in subset),
                train_metrics=train_metrics,
                dev_metrics=dev_metrics,
            )
        )
    return sorted(candidates, key=lambda c: c.rank_key)


def select(
    candidates: list[EnsembleCandidate], criteria: SelectionCriteria = SelectionCriteria()
) -> list[EnsembleCandidate]:
    """Filter candidates by the balanced-performance criteria, order preserved."""
    return [
        c
        for c in candidates
        if c.train_metrics.uaf1 > criteria.min_train_uaf1
        and c.dev_metrics.uaf1 > criteria.min_dev_uaf1
        and c.dev_metrics.f1[2] > criteria.min_dementia_f1
    ]


def frequency(
    selected: list[EnsembleCandidate], system_ids: list[str]
) -> tuple[dict[str, float], bool]:
    """Per-system frequency of appearance in the selected candidates.

    Returns the frequency map and a flag that is False when the selection
    is empty (frequencies are then reported as all-zero but undefined).
    """
    freqs = {sid: 0.0 for sid in system_ids}
    if not selected:
        return freqs, False
    for candidate in selected:
        for sid in candidate.members:
            freqs[sid] += 1.0
    return {sid: count / len(selected) for sid, count in freqs.items()}, True


ENSEMBLES_CSV_HEADER = ["members", "train_uaf1", "dev_uaf1", "f1_hc", "f1_mci", "f1_dem"]


def save_candidates(candidates: list[EnsembleCandidate], path: Path | str) -> None:
    """Write ensembles.csv: member list plus train/dev UAF1 and dev per-class F1."""
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(ENSEMBLES_CSV_HEADER)
        for c in candidates:
            writer.writerow(
                [
                    "+".join(c.members),
                    repr(c.train_metrics.uaf1),
                    repr(c.dev_metrics.uaf1),
                    repr(c.dev_metrics.f1[0]),
                    repr(c.dev_metrics.f1[1]),
                    repr(c.dev_metrics.f1[2]),
                ]
            )


def save_frequency(freqs: dict[str, float], defined: bool, path: Path | str) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(["system_id", "frequency", "defined"])
        for sid in sorted(freqs):
            writer.writerow([sid, repr(freqs[sid]), int(defined)])
