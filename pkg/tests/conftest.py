from __future__ import annotations

import csv
from pathlib import Path

import numpy as np
import pytest

from cogspeech.corpus import Manifest, SubjectRecord, RecordingRef, ClassLabel, Gender, Split, TaskKind
from cogspeech.synthetic import SUBJECT_COUNTS, synth_corpus


def write_manifest_csvs(
    out_dir: Path, subject_rows: list[list], recording_rows: list[list]
) -> Path:
    out_dir.mkdir(parents=True, exist_ok=True)
    with open(out_dir / "subjects.csv", "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(["subject_id", "gender", "age", "label", "mmse", "split"])
        writer.writerows(subject_rows)
    with open(out_dir / "recordings.csv", "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(["subject_id", "task", "audio_path", "transcript_path"])
        writer.writerows(recording_rows)
    return out_dir


def table2_manifest() -> Manifest:
    """In-memory manifest with the reference train/dev stratum counts."""
    subjects = []
    counter = 0
    for (split, label, gender), count in SUBJECT_COUNTS.items():
        for _ in range(count):
            counter += 1
            subjects.append(
                SubjectRecord(
                    subject_id=f"s{counter:03d}",
                    gender=gender,
                    age=70,
                    label=label,
                    mmse=None,
                    split=split,
                )
            )
    return Manifest(subjects=subjects, recordings=[])


def toy_manifest(n_per_class: int = 4, tasks: bool = False) -> Manifest:
    subjects = []
    recordings = []
    i = 0
    for label in ClassLabel:
        for _ in range(n_per_class):
            i += 1
            sid = f"t{i:02d}"
            subjects.append(
                SubjectRecord(sid, Gender.MALE, 65, label, None, Split.TRAIN)
            )
            if tasks:
                for task in TaskKind:
                    recordings.append(RecordingRef(sid, task, Path(f"{sid}_{task.value}.wav")))
    return Manifest(subjects=subjects, recordings=recordings)


@pytest.fixture(scope="session")
def corpus_dir(tmp_path_factory) -> Path:
    """One synthetic corpus shared by everything that only reads it."""
    out = tmp_path_factory.mktemp("corpus")
    synth_corpus(out, seed=7)
    return out


@pytest.fixture
def rng() -> np.random.Generator:
    return np.random.default_rng(12345)
