"""Data model, manifest I/O, and stratified fold planning.

The corpus layer owns everything that happens before signal processing:
subject and recording bookkeeping, the two-file CSV manifest format, and
subject-level stratified cross-validation fold assignment balanced by
diagnostic class and gender.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass, field
from enum import Enum, IntEnum
from pathlib import Path

import numpy as np

__all__ = [
    "ClassLabel",
    "TaskKind",
    "Gender",
    "Split",
    "SubjectRecord",
    "RecordingRef",
    "Manifest",
    "FoldPlan",
    "ManifestError",
    "FoldError",
    "load_manifest",
    "save_manifest",
    "make_folds",
]


class ClassLabel(IntEnum):
    """Diagnostic class with a stable 0/1/2 integer encoding."""

    HC = 0
    MCI = 1
    DEMENTIA = 2

    @classmethod
    def from_string(cls, text: str) -> "ClassLabel":
        try:
            return _LABEL_FROM_STR[text]
        except KeyError:
            raise ValueError(f"unknown class label {text!r}") from None

    def to_string(self) -> str:
        return _LABEL_TO_STR[self]


_LABEL_TO_STR = {ClassLabel.HC: "HC", ClassLabel.MCI: "MCI", ClassLabel.DEMENTIA: "Dementia"}
_LABEL_FROM_STR = {v: k for k, v in _LABEL_TO_STR.items()}


class TaskKind(str, Enum):
    """Elicitation task: picture description, phonemic fluency, semantic fluency."""

    CTD = "CTD"
    PFT = "PFT"
    SFT = "SFT"


class Gender(str, Enum):
    MALE = "Male"
    FEMALE = "Female"
    UNREPORTED = "Unreported"


class Split(str, Enum):
    TRAIN = "Train"
    DEV = "Dev"
    TEST = "Test"


class ManifestError(ValueError):
    """Raised when a manifest file is missing, malformed, or inconsistent."""


class FoldError(ValueError):
    """Raised when a fold plan cannot be constructed."""


@dataclass(frozen=True)
class SubjectRecord:
    """One participant.

    ``mmse`` is optional and, when present, must lie in [0, 30]. ``label``
    may be ``None`` only for test-split subjects.
    """

    subject_id: str
    gender: Gender
    age: int
    label: ClassLabel | None
    mmse: int | None
    split: Split

    def __post_init__(self) -> None:
        if self.mmse is not None and not (0 <= self.mmse <= 30):
            raise ValueError(f"mmse {self.mmse} outside [0, 30] for {self.subject_id}")
        if self.label is None and self.split is not Split.TEST:
            raise ValueError(f"subject {self.subject_id} in {self.split.value} split has no label")


@dataclass(frozen=True)
class RecordingRef:
    """One recording of one subject performing one task."""

    subject_id: str
    task: TaskKind
    audio_path: Path
    transcript_path: Path | None = None


@dataclass
class Manifest:
    """Subjects plus their recordings, in file order."""

    subjects: list[SubjectRecord] = field(default_factory=list)
    recordings: list[RecordingRef] = field(default_factory=list)

    def __post_init__(self) -> None:
        self.validate()

    def validate(self) -> None:
        seen: set[str] = set()
        for s in self.subjects:
            if s.subject_id in seen:
                raise ManifestError(f"duplicate subject_id {s.subject_id!r}")
            seen.add(s.subject_id)
        per_task: set[tuple[str, TaskKind]] = set()
        for r in self.recordings:
            if r.subject_id not in seen:
                raise ManifestError(f"recording references unknown subject {r.subject_id!r}")
            key = (r.subject_id, r.task)
            if key in per_task:
                raise ManifestError(
                    f"subject {r.subject_id!r} has more than one {r.task.value} recording"
                )
            per_task.add(key)

    def subject(self, subject_id: str) -> SubjectRecord:
        for s in self.subjects:
            if s.subject_id == subject_id:
                return s
        raise KeyError(subject_id)

    def subjects_in(self, split: Split) -> list[SubjectRecord]:
        return [s for s in self.subjects if s.split is split]

    def recording(self, subject_id: str, task: TaskKind) -> RecordingRef:
        for r in self.recordings:
            if r.subject_id == subject_id and r.task is task:
                return r
        raise KeyError((subject_id, task))


@dataclass(frozen=True)
class FoldPlan:
    """Subject-level fold assignment for the train split.

    Every train subject appears exactly once, so all recordings of a
    subject share a fold and out-of-fold scoring cannot leak.
    """

    k: int
    assignment: dict[str, int]

    def fold_of(self, subject_id: str) -> int:
        return self.assignment[subject_id]

    def members(self, fold: int) -> list[str]:
        return sorted(s for s, f in self.assignment.items() if f == fold)

    def sizes(self) -> list[int]:
        counts = [0] * self.k
        for f in self.assignment.values():
            counts[f] += 1
        return counts


SUBJECTS_FILENAME = "subjects.csv"
RECORDINGS_FILENAME = "recordings.csv"

_SUBJECT_HEADER = ["subject_id", "gender", "age", "label", "mmse", "split"]
_RECORDING_HEADER = ["subject_id", "task", "audio_path", "transcript_path"]


def _resolve_manifest_paths(path: Path) -> tuple[Path, Path]:
    path = Path(path)
    if path.is_dir():
        return path / SUBJECTS_FILENAME, path / RECORDINGS_FILENAME
    return path, path.parent / RECORDINGS_FILENAME


def load_manifest(path: Path | str) -> Manifest:
    """Load a manifest from ``path``.

    ``path`` may be a directory containing ``subjects.csv`` and
    ``recordings.csv``, or the subjects CSV itself (the recordings CSV is
    then expected as a sibling ``recordings.csv``). Empty ``mmse`` cells
    mean "not assessed"; empty ``label`` cells are allowed only for
    test-split subjects. Row order is preserved.

    Raises:
        ManifestError: missing file, bad header, malformed row (the error
            message names the file and 1-based line number), duplicate
            subject ids, or recordings referencing unknown subjects.
    """
    subjects_path, recordings_path = _resolve_manifest_paths(Path(path))
    subjects = _read_subjects(subjects_path)
    recordings = _read_recordings(recordings_path)
    try:
        return Manifest(subjects=subjects, recordings=recordings)
    except ManifestError as exc:
        raise ManifestError(f"{subjects_path.parent}: {exc}") from None


def _open_csv(path: Path, expected_header: list[str]) -> list[tuple[int, list[str]]]:
    if not path.exists():
        raise ManifestError(f"manifest file not found: {path}")
    with open(path, newline="", encoding="utf-8") as fh:
        rows = list(csv.reader(fh))
    if not rows or rows[0] != expected_header:
        raise ManifestError(f"{path}:1: expected header {','.join(expected_header)!r}")
    return [(i + 2, row) for i, row in enumerate(rows[1:]) if row]


def _read_subjects(path: Path) -> list[SubjectRecord]:
    subjects = []
    for lineno, row in _open_csv(path, _SUBJECT_HEADER):
        try:
            if len(row) != len(_SUBJECT_HEADER):
                raise ValueError(f"expected {len(_SUBJECT_HEADER)} fields, got {len(row)}")
            sid, gender, age, label, mmse, split = row
            subjects.append(
                SubjectRecord(
                    subject_id=sid,
                    gender=Gender(gender),
                    age=int(age),
                    label=ClassLabel.from_string(label) if label else None,
                    mmse=int(mmse) if mmse else None,
                    split=Split(split),
                )
            )
        except ValueError as exc:
            raise ManifestError(f"{path}:{lineno}: malformed subject row: {exc}") from None
    return subjects


def _read_recordings(path: Path) -> list[RecordingRef]:
    recordings = []
    base = path.parent
    for lineno, row in _open_csv(path, _RECORDING_HEADER):
        try:
            if len(row) != len(_RECORDING_HEADER):
                raise ValueError(f"expected {len(_RECORDING_HEADER)} fields, got {len(row)}")
            sid, task, audio, transcript = row
            recordings.append(
                RecordingRef(
                    subject_id=sid,
                    task=TaskKind(task),
                    audio_path=base / audio,
                    transcript_path=base / transcript if transcript else None,
                )
            )
        except ValueError as exc:
            raise ManifestError(f"{path}:{lineno}: malformed recording row: {exc}") from None
    return recordings


def save_manifest(manifest: Manifest, out_dir: Path | str) -> tuple[Path, Path]:
    """Write ``subjects.csv`` and ``recordings.csv`` under ``out_dir``.

    Paths in the recordings CSV are stored relative to ``out_dir``.
    """
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    subjects_path = out_dir / SUBJECTS_FILENAME
    recordings_path = out_dir / RECORDINGS_FILENAME
    with open(subjects_path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(_SUBJECT_HEADER)
        for s in manifest.subjects:
            writer.writerow(
                [
                    s.subject_id,
                    s.gender.value,
                    s.age,
                    s.label.to_string() if s.label is not None else "",
                    s.mmse if s.mmse is not None else "",
                    s.split.value,
                ]
            )
    with open(recordings_path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(_RECORDING_HEADER)
        for r in manifest.recordings:
            audio = _relativize(r.audio_path, out_dir)
            transcript = _relativize(r.transcript_path, out_dir) if r.transcript_path else ""
            writer.writerow([r.subject_id, r.task.value, audio, transcript])
    return subjects_path, recordings_path


def _relativize(p: Path, base: Path) -> str:
    try:
        return Path(p).relative_to(base).as_posix()
    except ValueError:
        return Path(p).as_posix()


def make_folds(manifest: Manifest, k: int, seed: int) -> FoldPlan:
    """Assign train-split subjects to ``k`` folds, stratified by (label, gender).

    Within each stratum, subject ids are sorted, shuffled with a seeded
    generator, and dealt round-robin; the dealing pointer carries over from
    one stratum to the next, so both overall fold sizes and per-stratum
    counts stay within one of the ideal proportional count.

    Raises:
        FoldError: ``k < 2``, fewer train subjects than folds, or an
            unlabeled train subject.
    """
    if k < 2:
        raise FoldError(f"fold count must be >= 2, got {k}")
    train = manifest.subjects_in(Split.TRAIN)
    if len(train) < k:
        raise FoldError(f"{len(train)} train subjects cannot fill {k} folds")
    for s in train:
        if s.label is None:
            raise FoldError(f"train subject {s.subject_id!r} has no label")

    strata: dict[tuple[int, str], list[str]] = {}
    for s in train:
        strata.setdefault((int(s.label), s.gender.value), []).append(s.subject_id)

    rng = np.random.default_rng(seed)
    assignment: dict[str, int] = {}
    pointer = 0
    for key in sorted(strata):
        ids = sorted(strata[key])
        order = rng.permutation(len(ids))
        for idx in order:
            assignment[ids[idx]] = pointer % k
            pointer += 1
    return FoldPlan(k=k, assignment=assignment)
