"""Glue between corpus, features, classifiers, and the CLI.

Feature vectors are assembled per system (one row per subject), persisted
as CSVs, and fed through cross-validation to score CSVs; the ensemble
stage works purely from those persisted files so every reported number can
be recomputed from disk.
"""

from __future__ import annotations

import csv
import json
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .acoustic import PAUSE_FEATURE_NAMES, PcaReducer, concat_embeddings, load_embedding, pause_features
from .classifiers import (
    ConstantClassifier,
    FfpClassifier,
    ForestClassifier,
    LinearSvmClassifier,
    SoftmaxRegression,
    SoftScoreClassifier,
    TreeClassifier,
)
from .config import ConfigError, ExperimentConfig, SystemSpec
from .corpus import Manifest, Split, TaskKind
from .dsp import read_wav, vad
from .evaluation import CvResult, MetricReport, run_cv
from .text import (
    TargetLexicon,
    Transcript,
    extract_targets,
    fluency_features,
    linguistic_features,
    load_lexicon,
    load_macrodescriptors,
)

__all__ = [
    "FeatureContext",
    "assemble_system_features",
    "save_feature_table",
    "load_feature_table",
    "make_classifier",
    "run_system",
    "labels_of",
    "metric_report_to_dict",
]

_TASKS = (TaskKind.CTD, TaskKind.PFT, TaskKind.SFT)


def labels_of(manifest: Manifest, split: Split) -> dict[str, int]:
    return {s.subject_id: int(s.label) for s in manifest.subjects_in(split) if s.label is not None}


@dataclass
class FeatureContext:
    """Lazy, cached access to every per-recording feature resource."""

    manifest: Manifest
    config: ExperimentConfig
    _lexicon: TargetLexicon | None = None
    _macros: dict | None = None
    _vad_cache: dict = field(default_factory=dict)

    @property
    def lexicon(self) -> TargetLexicon:
        if self._lexicon is None:
            words = self.config.resource(self.config.lexicon_words, "lexicon", "animals.txt")
            vecs = self.config.resource(
                self.config.lexicon_embeddings, "lexicon", "animal_embeddings.csv"
            )
            self._lexicon = load_lexicon(words, vecs)
        return self._lexicon

    @property
    def macros(self) -> dict:
        if self._macros is None:
            path = self.config.resource(self.config.macrodescriptors, "macro", "macrodescriptors.csv")
            self._macros = load_macrodescriptors(path)
        return self._macros

    def _audio_path(self, subject_id: str, task: TaskKind) -> Path:
        ref = self.manifest.recording(subject_id, task)
        denoised = Path(self.config.workdir) / "denoised" / Path(ref.audio_path).name
        return denoised if denoised.exists() else Path(ref.audio_path)

    def _transcript(self, subject_id: str, task: TaskKind) -> Transcript:
        ref = self.manifest.recording(subject_id, task)
        if ref.transcript_path is None:
            raise FileNotFoundError(f"no transcript for ({subject_id}, {task.value})")
        return Transcript.from_raw(Path(ref.transcript_path).read_text(encoding="utf-8"))

    def pause_vector(self, subject_id: str, task: TaskKind) -> np.ndarray:
        key = (subject_id, task)
        if key not in self._vad_cache:
            audio = read_wav(self._audio_path(subject_id, task))
            self._vad_cache[key] = vad(audio, self.config.vad)
        return pause_features(self._vad_cache[key]).as_vector()

    def fluency_vector(self, subject_id: str, task: TaskKind) -> np.ndarray:
        transcript = self._transcript(subject_id, task)
        targets = extract_targets(transcript, self.lexicon)
        return fluency_features(targets, self.lexicon, len(transcript.tokens)).as_vector()

    def ling_vector(self, subject_id: str, task: TaskKind) -> np.ndarray:
        return linguistic_features(self._transcript(subject_id, task)).as_vector()

    def macro_vector(self, subject_id: str, task: TaskKind) -> np.ndarray:
        try:
            return self.macros[(subject_id, task.value)].as_vector()
        except KeyError:
            raise KeyError(f"no macrodescriptors for ({subject_id}, {task.value})") from None

    def embedding_vector(self, subject_id: str, task_scope: str, source: str) -> np.ndarray:
        embed_dir = self.config.resource(self.config.embeddings_dir, "embeddings")
        if task_scope == "ALL":
            per_task = {
                t: load_embedding(
                    embed_dir / f"{subject_id}_{t.value}_{source}.f32", source=source, task=t
                )
                for t in _TASKS
            }
            return concat_embeddings(per_task).values
        task = TaskKind(task_scope)
        return load_embedding(
            embed_dir / f"{subject_id}_{task.value}_{source}.f32", source=source, task=task
        ).values


_FLUENCY_NAMES = (
    "n_unique_targets",
    "n_target_repetitions",
    "mean_adjacent_cosine",
    "std_adjacent_cosine",
    "n_targets_total",
    "target_token_fraction",
)
_LING_NAMES = (
    "n_tokens",
    "n_types",
    "type_token_ratio",
    "mean_word_len_chars",
    "n_sentences",
    "mean_sentence_len_tokens",
    "n_fillers",
    "n_immediate_repetitions",
    "content_word_ratio",
    "hapax_ratio",
    "brunet_index",
)


def _block(ctx: FeatureContext, feature: str, system: SystemSpec, subject_id: str):
    """One feature block (names, vector) for one subject."""
    if feature in ("pauses", "fluency", "ling", "macro"):
        if system.task == "ALL":
            raise ConfigError(f"{system.system_id}: feature {feature!r} needs a single task scope")
        task = TaskKind(system.task)
    if feature == "pauses":
        return [f"pauses.{n}" for n in PAUSE_FEATURE_NAMES], ctx.pause_vector(subject_id, task)
    if feature == "fluency":
        return [f"fluency.{n}" for n in _FLUENCY_NAMES], ctx.fluency_vector(subject_id, task)
    if feature == "ling":
        return [f"ling.{n}" for n in _LING_NAMES], ctx.ling_vector(subject_id, task)
    if feature == "macro":
        return [f"macro.m{i + 1}" for i in range(4)], ctx.macro_vector(subject_id, task)
    source = feature.split(":", 1)[1]
    vec = ctx.embedding_vector(subject_id, system.task, source)
    return [f"{source}.e{i}" for i in range(len(vec))], vec


def assemble_system_features(
    ctx: FeatureContext, system: SystemSpec
) -> tuple[list[str], dict[str, np.ndarray], dict[str, np.ndarray]]:
    """Build one row per train/dev subject for a system's feature recipe.

    Embedding blocks are PCA-reduced to ``system.pca_dim`` when set; the
    reducer is fit on train-split rows only and applied to both splits.

    Returns:
        (feature names, train vectors by subject, dev vectors by subject)
    """
    train_ids = sorted(s.subject_id for s in ctx.manifest.subjects_in(Split.TRAIN))
    dev_ids = sorted(s.subject_id for s in ctx.manifest.subjects_in(Split.DEV))

    names: list[str] = []
    train_blocks: list[np.ndarray] = []
    dev_blocks: list[np.ndarray] = []
    for feature in system.features:
        block_names, first = _block(ctx, feature, system, train_ids[0])
        train_mat = np.vstack(
            [first] + [_block(ctx, feature, system, sid)[1] for sid in train_ids[1:]]
        )
        dev_mat = (
            np.vstack([_block(ctx, feature, system, sid)[1] for sid in dev_ids])
            if dev_ids
            else np.empty((0, train_mat.shape[1]))
        )
        if feature.startswith("embed:") and system.pca_dim is not None:
            reducer = PcaReducer(target_dim=system.pca_dim).fit(train_mat)
            train_mat = reducer.transform(train_mat)
            dev_mat = reducer.transform(dev_mat) if len(dev_mat) else dev_mat[:, : system.pca_dim]
            source = feature.split(":", 1)[1]
            block_names = [f"{source}.pc{i}" for i in range(system.pca_dim)]
        names.extend(block_names)
        train_blocks.append(train_mat)
        dev_blocks.append(dev_mat)

    train_x = np.hstack(train_blocks)
    dev_x = np.hstack(dev_blocks) if dev_ids else np.empty((0, train_x.shape[1]))
    train_map = {sid: train_x[i] for i, sid in enumerate(train_ids)}
    dev_map = {sid: dev_x[i] for i, sid in enumerate(dev_ids)}
    return names, train_map, dev_map


def save_feature_table(
    path: Path | str,
    names: list[str],
    train: dict[str, np.ndarray],
    dev: dict[str, np.ndarray],
) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(["subject_id", "split"] + list(names))
        for split, table in (("Train", train), ("Dev", dev)):
            for sid in sorted(table):
                writer.writerow([sid, split] + [repr(float(v)) for v in table[sid]])


def load_feature_table(
    path: Path | str,
) -> tuple[list[str], dict[str, np.ndarray], dict[str, np.ndarray]]:
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        header = next(reader)
        names = header[2:]
        train: dict[str, np.ndarray] = {}
        dev: dict[str, np.ndarray] = {}
        for row in reader:
            if not row:
                continue
            vec = np.array([float(v) for v in row[2:]], dtype=np.float64)
            (train if row[1] == "Train" else dev)[row[0]] = vec
    return names, train, dev


def make_classifier(system: SystemSpec, seed: int) -> SoftScoreClassifier:
    """Instantiate the roster classifier with its hyperparameters and seed."""
    params = dict(system.params)
    if system.classifier == "svm":
        return LinearSvmClassifier(seed=seed, **params)
    if system.classifier == "tree":
        return TreeClassifier(seed=seed, **params)
    if system.classifier == "forest":
        return ForestClassifier(seed=seed, **params)
    if system.classifier == "ffp":
        return FfpClassifier(**params)
    if system.classifier == "constant":
        return ConstantClassifier(**params)
    return SoftmaxRegression(seed=seed, **params)


def run_system(
    system: SystemSpec,
    features_path: Path | str,
    manifest: Manifest,
    folds,
    seed: int,
    allow_missing: bool = False,
) -> CvResult:
    """Cross-validate one system from its persisted feature table."""
    _, train_feats, dev_feats = load_feature_table(features_path)
    return run_cv(
        system_id=system.system_id,
        make_classifier=lambda: make_classifier(system, seed),
        train_features=train_feats,
        train_labels=labels_of(manifest, Split.TRAIN),
        folds=folds,
        dev_features=dev_feats,
        dev_labels=labels_of(manifest, Split.DEV),
        allow_missing=allow_missing,
    )


def metric_report_to_dict(report: MetricReport | None) -> dict | None:
    if report is None:
        return None
    return {
        "uaf1": report.uaf1,
        "f1": list(report.f1),
        "precision": list(report.precision),
        "recall": list(report.recall),
    }


def save_system_metrics(result: CvResult, path: Path | str) -> None:
    payload = {
        "system_id": result.system_id,
        "train": metric_report_to_dict(result.train_metrics),
        "dev": metric_report_to_dict(result.dev_metrics),
        "n_oof": len(result.oof_scores),
        "n_dev": len(result.dev_scores),
    }
    Path(path).write_text(json.dumps(payload, indent=2, sort_keys=True) + "\n", encoding="utf-8")
