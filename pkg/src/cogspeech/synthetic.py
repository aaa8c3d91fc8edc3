"""Seeded synthetic corpus generator for desk-scale runs and tests.

The generated population has 117 train and 40 dev subjects with fixed
counts per (split, label, gender) stratum, including one unreported-gender
healthy control in the train split. Audio is tone/silence alternation whose pause
statistics depend on the diagnostic class (dementia: longer and more
frequent pauses), transcripts are class-dependent token streams (dementia:
fewer unique fluency targets, more repetitions and fillers), and synthetic
embedding vectors have class-shifted means.
"""

from __future__ import annotations

import csv
from pathlib import Path

import numpy as np

from .corpus import (
    ClassLabel,
    Gender,
    Manifest,
    RecordingRef,
    Split,
    SubjectRecord,
    TaskKind,
    save_manifest,
)
from .dsp import AudioBuffer, write_wav

__all__ = ["synth_corpus", "SUBJECT_COUNTS", "EMBEDDING_DIMS"]

# Subject counts per (split, label, gender); sums: 117 train, 40 dev.
SUBJECT_COUNTS: dict[tuple[Split, ClassLabel, Gender], int] = {
    (Split.TRAIN, ClassLabel.HC, Gender.MALE): 23,
    (Split.TRAIN, ClassLabel.HC, Gender.FEMALE): 37,
    (Split.TRAIN, ClassLabel.HC, Gender.UNREPORTED): 1,
    (Split.TRAIN, ClassLabel.MCI, Gender.MALE): 22,
    (Split.TRAIN, ClassLabel.MCI, Gender.FEMALE): 22,
    (Split.TRAIN, ClassLabel.DEMENTIA, Gender.MALE): 8,
    (Split.TRAIN, ClassLabel.DEMENTIA, Gender.FEMALE): 4,
    (Split.DEV, ClassLabel.HC, Gender.MALE): 12,
    (Split.DEV, ClassLabel.HC, Gender.FEMALE): 9,
    (Split.DEV, ClassLabel.MCI, Gender.MALE): 7,
    (Split.DEV, ClassLabel.MCI, Gender.FEMALE): 8,
    (Split.DEV, ClassLabel.DEMENTIA, Gender.MALE): 3,
    (Split.DEV, ClassLabel.DEMENTIA, Gender.FEMALE): 1,
}

# (age mean, age sd) per (label, gender); unreported gender uses the label mean.
_AGE_STATS: dict[tuple[ClassLabel, Gender], tuple[float, float]] = {
    (ClassLabel.HC, Gender.MALE): (64.8, 13.3),
    (ClassLabel.HC, Gender.FEMALE): (62.9, 12.1),
    (ClassLabel.HC, Gender.UNREPORTED): (63.8, 12.7),
    (ClassLabel.MCI, Gender.MALE): (69.1, 7.9),
    (ClassLabel.MCI, Gender.FEMALE): (69.8, 10.3),
    (ClassLabel.DEMENTIA, Gender.MALE): (75.8, 8.0),
    (ClassLabel.DEMENTIA, Gender.FEMALE): (69.0, 6.3),
}

_MMSE_STATS = {ClassLabel.HC: (29.0, 1.0), ClassLabel.MCI: (26.8, 2.2), ClassLabel.DEMENTIA: (24.0, 3.0)}
_MMSE_RATE = 69 / 157  # fraction of subjects with an MMSE annotation

SAMPLE_RATE = 16000
EMBEDDING_DIMS = {"ECAPA": 192, "TRILLsson": 256}

# Class-anchored generation parameters are interpolated along a per-subject
# severity in [0, 2] (0 = typical HC, 2 = typical dementia) drawn around the
# class label. The jitter makes classes overlap the way clinical data does;
# its width is tuned so a linear classifier on pause features lands in the
# 70-90% train accuracy band.
_SEVERITY_SD = 0.55

# Speech/pause anchors at severity 0/1/2: mean speech, sd, mean pause, sd.
_RHYTHM_ANCHORS = (
    (1.7, 0.45, 0.35, 0.12),
    (1.3, 0.40, 0.55, 0.18),
    (0.9, 0.35, 0.85, 0.30),
)
_TASK_DURATION_S = {TaskKind.CTD: 12.0, TaskKind.PFT: 10.0, TaskKind.SFT: 10.0}
# Keep silence comfortably above the VAD noise-floor percentile in every file.
_MIN_SILENCE_FRACTION = 0.30

_FILLERS = ("um", "uh", "hmm", "er")

_ANIMALS = (
    "cow horse pig sheep goat chicken duck goose donkey rabbit".split(),
    "lion tiger elephant giraffe zebra monkey bear wolf fox deer".split(),
    "dog cat hamster parrot goldfish turtle canary gerbil".split(),
    "whale dolphin shark octopus seal crab lobster penguin".split(),
)

_P_WORDS = (
    "pig pan paper party pencil pocket purple pillow planet pepper piano picture "
    "pumpkin puzzle pirate palace pebble pattern parade postman pony pudding path "
    "pear plum peach pine pool pot"
).split()

_CTD_VOCAB = (
    "mother boy girl stool cookie jar sink water plate window curtain kitchen "
    "dish cup floor counter garden dress shoe hand reaching falling washing "
    "drying spilling standing open little outside summer busy wet full high"
).split()

# Severity anchors: sentences, sentence length lo/hi, vocab fraction,
# filler rate, repeat rate.
_CTD_ANCHORS = (
    (7.0, 6.0, 10.0, 1.0, 0.04, 0.02),
    (5.5, 5.0, 9.0, 0.75, 0.10, 0.07),
    (4.0, 4.0, 7.0, 0.50, 0.20, 0.14),
)

# Severity anchors: target count mean, count sd, repetition rate,
# cluster switch rate, filler rate.
_FLUENCY_ANCHORS = (
    (16.0, 2.5, 0.05, 0.25, 0.05),
    (12.0, 2.5, 0.16, 0.45, 0.12),
    (7.5, 2.0, 0.34, 0.68, 0.22),
)

_MACRO_ANCHORS = (
    np.array([0.80, 0.20, 0.15, 0.70]),
    np.array([0.55, 0.45, 0.40, 0.50]),
    np.array([0.30, 0.70, 0.65, 0.30]),
)
_MACRO_SD = 0.28

_EMBED_SHIFT = 1.5
_EMBED_SUBJECT_SD = 0.50
_EMBED_NOISE_SD = 0.65


def _lerp3(anchors, severity: float):
    """Piecewise-linear interpolation between anchors at severity 0, 1, 2."""
    if severity <= 1.0:
        lo, hi, t = anchors[0], anchors[1], severity
    else:
        lo, hi, t = anchors[1], anchors[2], severity - 1.0
    if isinstance(lo, tuple):
        return tuple(a + t * (b - a) for a, b in zip(lo, hi))
    return lo + t * (hi - lo)


def synth_corpus(out_dir: Path | str, seed: int) -> Manifest:
    """Generate a complete synthetic corpus under ``out_dir``.

    Writes per-recording WAV audio and transcripts, per-(subject, task,
    source) embedding files, a macrodescriptor CSV, a fluency target
    lexicon with word embeddings, and the two manifest CSVs. Everything is
    a pure function of ``seed``: two runs produce byte-identical files.

    Returns:
        The generated manifest (also saved to ``out_dir``).

    Raises:
        OSError: ``out_dir`` is not writable.
    """
    out_dir = Path(out_dir)
    for sub in ("audio", "transcripts", "embeddings", "macro", "lexicon"):
        (out_dir / sub).mkdir(parents=True, exist_ok=True)

    rng = np.random.default_rng(seed)
    _write_lexicon(out_dir / "lexicon", rng)
    class_dirs = {
        source: {label: _unit(rng.normal(size=dim)) for label in ClassLabel}
        for source, dim in EMBEDDING_DIMS.items()
    }

    subjects: list[SubjectRecord] = []
    recordings: list[RecordingRef] = []
    macro_rows: list[list[str]] = []
    counter = 0
    for (split, label, gender), count in SUBJECT_COUNTS.items():
        for _ in range(count):
            counter += 1
            prefix = "tr" if split is Split.TRAIN else "dv"
            sid = f"{prefix}{counter:03d}"
            severity = float(np.clip(rng.normal(int(label), _SEVERITY_SD), 0.0, 2.0))
            subjects.append(_make_subject(sid, split, label, gender, rng))
            recordings.extend(
                _make_recordings(out_dir, sid, label, severity, class_dirs, macro_rows, rng)
            )

    with open(out_dir / "macro" / "macrodescriptors.csv", "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(["subject_id", "task", "m1", "m2", "m3", "m4"])
        writer.writerows(macro_rows)

    manifest = Manifest(subjects=subjects, recordings=recordings)
    save_manifest(manifest, out_dir)
    return manifest


def _unit(v: np.ndarray) -> np.ndarray:
    return v / np.linalg.norm(v)


def _make_subject(
    sid: str, split: Split, label: ClassLabel, gender: Gender, rng: np.random.Generator
) -> SubjectRecord:
    age_mean, age_sd = _AGE_STATS[(label, gender)]
    age = int(np.clip(round(rng.normal(age_mean, age_sd)), 40, 95))
    mmse = None
    if rng.random() < _MMSE_RATE:
        mmse_mean, mmse_sd = _MMSE_STATS[label]
        mmse = int(np.clip(round(rng.normal(mmse_mean, mmse_sd)), 0, 30))
    return SubjectRecord(subject_id=sid, gender=gender, age=age, label=label, mmse=mmse, split=split)


def _make_recordings(
    out_dir: Path,
    sid: str,
    label: ClassLabel,
    severity: float,
    class_dirs: dict[str, dict[ClassLabel, np.ndarray]],
    macro_rows: list[list[str]],
    rng: np.random.Generator,
) -> list[RecordingRef]:
    refs = []
    # One subject-level factor slows or speeds all of a subject's recordings.
    tempo = float(np.clip(np.exp(rng.normal(0.0, 0.14)), 0.8, 1.3))
    f0 = float(rng.uniform(150.0, 280.0))
    subject_offsets = {
        source: rng.normal(0.0, _EMBED_SUBJECT_SD, size=dim)
        for source, dim in EMBEDDING_DIMS.items()
    }
    for task in TaskKind:
        audio_rel = f"audio/{sid}_{task.value}.wav"
        text_rel = f"transcripts/{sid}_{task.value}.txt"
        audio = _make_audio(severity, task, tempo, f0, rng)
        write_wav(out_dir / audio_rel, audio)
        (out_dir / text_rel).write_text(_make_transcript(severity, task, rng), encoding="utf-8")
        for source, dim in EMBEDDING_DIMS.items():
            vec = (
                _EMBED_SHIFT * class_dirs[source][label]
                + subject_offsets[source]
                + rng.normal(0.0, _EMBED_NOISE_SD, size=dim)
            )
            path = out_dir / "embeddings" / f"{sid}_{task.value}_{source}.f32"
            path.write_bytes(vec.astype("<f4").tobytes())
        macro = _lerp3(_MACRO_ANCHORS, severity) + rng.normal(0.0, _MACRO_SD, size=4)
        macro_rows.append([sid, task.value] + [f"{m:.6f}" for m in macro])
        refs.append(RecordingRef(sid, task, out_dir / audio_rel, out_dir / text_rel))
    return refs


def _make_audio(
    severity: float, task: TaskKind, tempo: float, f0: float, rng: np.random.Generator
) -> AudioBuffer:
    speech_mean, speech_sd, pause_mean, pause_sd = _lerp3(_RHYTHM_ANCHORS, severity)
    target = _TASK_DURATION_S[task]
    chunks = [np.zeros(int(rng.uniform(0.6, 1.0) * SAMPLE_RATE))]  # protocol lead silence
    silence = len(chunks[0])
    elapsed = 0.0
    speaking = True
    while elapsed < target:
        if speaking:
            dur = max(0.2, rng.normal(speech_mean / tempo, speech_sd))
            chunks.append(_tone(dur, f0))
        else:
            dur = max(0.12, rng.normal(pause_mean * tempo, pause_sd))
            chunks.append(np.zeros(int(dur * SAMPLE_RATE)))
            silence += len(chunks[-1])
        elapsed += dur
        speaking = not speaking
    chunks.append(np.zeros(int(rng.uniform(0.5, 0.9) * SAMPLE_RATE)))  # trail silence
    silence += len(chunks[-1])
    total = sum(len(c) for c in chunks)
    if silence < _MIN_SILENCE_FRACTION * total:
        pad = int(np.ceil((_MIN_SILENCE_FRACTION * total - silence) / (1.0 - _MIN_SILENCE_FRACTION)))
        chunks.append(np.zeros(pad))
    return AudioBuffer(samples=np.concatenate(chunks), sample_rate=SAMPLE_RATE)


def _tone(duration_s: float, f0: float) -> np.ndarray:
    n = int(duration_s * SAMPLE_RATE)
    t = np.arange(n) / SAMPLE_RATE
    ramp = min(160, n // 2)  # 10 ms fade avoids clicks at segment edges
    env = np.ones(n)
    env[:ramp] = np.linspace(0.0, 1.0, ramp)
    env[n - ramp :] = np.linspace(1.0, 0.0, ramp)
    return 0.3 * env * np.sin(2 * np.pi * f0 * t)


def _make_transcript(severity: float, task: TaskKind, rng: np.random.Generator) -> str:
    if task is TaskKind.CTD:
        return _ctd_text(severity, rng)
    words = _P_WORDS if task is TaskKind.PFT else None
    return _fluency_text(severity, rng, pool=words)


def _ctd_text(severity: float, rng: np.random.Generator) -> str:
    n_sent, len_lo, len_hi, vocab_frac, filler_rate, repeat_rate = _lerp3(_CTD_ANCHORS, severity)
    vocab = _CTD_VOCAB[: max(6, int(len(_CTD_VOCAB) * vocab_frac))]
    sentences = []
    for _ in range(max(2, int(round(rng.normal(n_sent, 1.0))))):
        words: list[str] = []
        for _ in range(int(rng.integers(int(len_lo), int(len_hi) + 1))):
            if rng.random() < filler_rate:
                words.append(str(rng.choice(_FILLERS)))
            word = str(rng.choice(vocab))
            words.append(word)
            if rng.random() < repeat_rate:
                words.append(word)
        sentences.append(" ".join(words) + ".")
    return " ".join(sentences) + "\n"


def _fluency_text(severity: float, rng: np.random.Generator, pool: list[str] | None) -> str:
    count_mean, count_sd, rep_rate, switch_rate, filler_rate = _lerp3(_FLUENCY_ANCHORS, severity)
    n_targets = max(3, int(round(rng.normal(count_mean, count_sd))))
    produced: list[str] = []
    if pool is not None:
        remaining = list(pool)
        for _ in range(n_targets):
            if produced and rng.random() < rep_rate:
                produced.append(str(rng.choice(produced)))
            elif remaining:
                word = remaining.pop(int(rng.integers(len(remaining))))
                produced.append(word)
    else:
        cluster = int(rng.integers(len(_ANIMALS)))
        remaining_by_cluster = [list(c) for c in _ANIMALS]
        for _ in range(n_targets):
            if produced and rng.random() < rep_rate:
                produced.append(str(rng.choice(produced)))
                continue
            if rng.random() < switch_rate or not remaining_by_cluster[cluster]:
                options = [i for i, c in enumerate(remaining_by_cluster) if c]
                if not options:
                    break
                cluster = int(rng.choice(options))
            produced.append(remaining_by_cluster[cluster].pop(0))
    tokens: list[str] = []
    for word in produced:
        if rng.random() < filler_rate:
            tokens.append(str(rng.choice(_FILLERS)))
        tokens.append(word)
    return " ".join(tokens) + "\n"


def _write_lexicon(lex_dir: Path, rng: np.random.Generator) -> dict[str, np.ndarray]:
    """Write the animal lexicon and unit-norm word embeddings; return the vectors."""
    dim = 16
    centers = [_unit(rng.normal(size=dim)) for _ in _ANIMALS]
    vecs: dict[str, np.ndarray] = {}
    words: list[str] = []
    for center, cluster in zip(centers, _ANIMALS):
        for word in cluster:
            vecs[word] = _unit(center + 0.35 * rng.normal(size=dim))
            words.append(word)
    (lex_dir / "animals.txt").write_text("\n".join(words) + "\n", encoding="utf-8")
    with open(lex_dir / "animal_embeddings.csv", "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        for word in words:
            writer.writerow([word] + [f"{x:.8f}" for x in vecs[word]])
    return vecs
