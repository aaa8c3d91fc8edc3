"""Transcript features: tokenization, fluency and linguistic measures, WER.

Fluency-target extraction matches tokens against a pluggable lexicon file
(one word per line) with an accompanying word-embedding table, which keeps
the feature semantics of LLM-identified target words without a model
dependency. WER uses a minimum-edit alignment and is computed after
disfluency tokens are collapsed onto a uniform placeholder, so hypothesis
spellings like "umm"/"um" stop counting as errors once both sides are
normalized.
"""

from __future__ import annotations

import csv
import re
from dataclasses import dataclass
from pathlib import Path

import numpy as np

__all__ = [
    "Transcript",
    "TargetLexicon",
    "FluencyFeatures",
    "LinguisticFeatures",
    "MacroDescriptors",
    "WerReport",
    "DEFAULT_DISFLUENCIES",
    "DEFAULT_FILLERS",
    "DEFAULT_STOPWORDS",
    "DISFLUENCY_PLACEHOLDER",
    "tokenize",
    "extract_targets",
    "fluency_features",
    "linguistic_features",
    "normalize_disfluencies",
    "wer",
    "load_lexicon",
    "load_macrodescriptors",
    "load_disfluency_set",
]

DEFAULT_DISFLUENCIES = frozenset({"um", "uh", "hmm", "er", "erm", "mm"})
DEFAULT_FILLERS = DEFAULT_DISFLUENCIES
DEFAULT_STOPWORDS = frozenset(
    "a an the and or but if then so of to in on at by for with from as is are was "
    "were be been am it its this that these those there here he she they we you i "
    "his her their our your my me him them us do does did not no yes".split()
)
DISFLUENCY_PLACEHOLDER = "<disfl>"

_TOKEN_RE = re.compile(r"[a-z]+(?:'[a-z]+)*")


def tokenize(raw: str) -> list[str]:
    """Lowercase and split on non-alphabetic runs, keeping in-word apostrophes.

    "it's p-p-pig" becomes ["it's", "p", "p", "pig"].
    """
    return _TOKEN_RE.findall(raw.lower())


@dataclass(frozen=True)
class Transcript:
    """Raw text plus its deterministic tokenization."""

    raw: str
    tokens: tuple[str, ...]

    @classmethod
    def from_raw(cls, raw: str) -> "Transcript":
        return cls(raw=raw, tokens=tuple(tokenize(raw)))


@dataclass(frozen=True)
class TargetLexicon:
    """Fluency target words with unit-normalized embeddings."""

    words: frozenset[str]
    embeddings: dict[str, np.ndarray]

    def __post_init__(self) -> None:
        missing = self.words - self.embeddings.keys()
        if missing:
            raise ValueError(f"lexicon words without embeddings: {sorted(missing)[:5]}")
        for word, vec in self.embeddings.items():
            norm = np.linalg.norm(vec)
            if abs(norm - 1.0) > 1e-6:
                raise ValueError(f"embedding for {word!r} not unit-norm (|v| = {norm:.6g})")


def load_lexicon(words_path: Path | str, embeddings_path: Path | str) -> TargetLexicon:
    """Load a lexicon (one word per line) and its ``word,v1,...,vd`` CSV.

    Embeddings are normalized to unit length on ingest; a zero vector is
    rejected.
    """
    words = [
        line.strip().lower()
        for line in Path(words_path).read_text(encoding="utf-8").splitlines()
        if line.strip()
    ]
    embeddings: dict[str, np.ndarray] = {}
    with open(embeddings_path, newline="", encoding="utf-8") as fh:
        for row in csv.reader(fh):
            if not row:
                continue
            vec = np.array([float(x) for x in row[1:]], dtype=np.float64)
            norm = np.linalg.norm(vec)
            if norm == 0:
                raise ValueError(f"zero embedding for {row[0]!r}")
            embeddings[row[0].strip().lower()] = vec / norm
    return TargetLexicon(words=frozenset(words), embeddings=embeddings)


def extract_targets(transcript: Transcript, lexicon: TargetLexicon) -> list[str]:
    """Order-preserving subsequence of tokens that are lexicon members.

    Duplicates are kept; repetitions are a feature, not noise.

    Raises:
        ValueError: empty lexicon.
    """
    if not lexicon.words:
        raise ValueError("lexicon is empty")
    return [tok for tok in transcript.tokens if tok in lexicon.words]


@dataclass(frozen=True)
class FluencyFeatures:
    """Six fluency-task features over the extracted target sequence."""

    n_unique_targets: int
    n_target_repetitions: int
    mean_adjacent_cosine: float
    std_adjacent_cosine: float
    n_targets_total: int
    target_token_fraction: float

    def as_vector(self) -> np.ndarray:
        return np.array(
            [
                self.n_unique_targets,
                self.n_target_repetitions,
                self.mean_adjacent_cosine,
                self.std_adjacent_cosine,
                self.n_targets_total,
                self.target_token_fraction,
            ],
            dtype=np.float64,
        )


def fluency_features(
    targets: list[str], lexicon: TargetLexicon, n_tokens_total: int
) -> FluencyFeatures:
    """Compute fluency features from a target sequence.

    Adjacent cosines are taken over consecutive pairs of the target
    sequence; with fewer than two targets both cosine statistics are 0
    (defined-0), as is the token fraction on an empty transcript.

    Raises:
        KeyError: a target word has no embedding.
    """
    n_total = len(targets)
    n_unique = len(set(targets))
    cosines = []
    for left, right in zip(targets, targets[1:]):
        cosines.append(float(np.dot(lexicon.embeddings[left], lexicon.embeddings[right])))
    arr = np.array(cosines)
    return FluencyFeatures(
        n_unique_targets=n_unique,
        n_target_repetitions=n_total - n_unique,
        mean_adjacent_cosine=float(arr.mean()) if len(arr) else 0.0,
        std_adjacent_cosine=float(arr.std()) if len(arr) >= 2 else 0.0,
        n_targets_total=n_total,
        target_token_fraction=n_total / n_tokens_total if n_tokens_total > 0 else 0.0,
    )


@dataclass(frozen=True)
class LinguisticFeatures:
    """Eleven general linguistic features of one transcript.

    ``hapax_ratio`` is once-occurring types over all types; the lexical
    richness index is ``n_tokens ** (n_types ** -0.165)``. An empty
    transcript yields the defined-0 record.
    """

    n_tokens: int
    n_types: int
    type_token_ratio: float
    mean_word_len_chars: float
    n_sentences: int
    mean_sentence_len_tokens: float
    n_fillers: int
    n_immediate_repetitions: int
    content_word_ratio: float
    hapax_ratio: float
    brunet_index: float

    def as_vector(self) -> np.ndarray:
        return np.array(
            [
                self.n_tokens,
                self.n_types,
                self.type_token_ratio,
                self.mean_word_len_chars,
                self.n_sentences,
                self.mean_sentence_len_tokens,
                self.n_fillers,
                self.n_immediate_repetitions,
                self.content_word_ratio,
                self.hapax_ratio,
                self.brunet_index,
            ],
            dtype=np.float64,
        )


_SENTENCE_SPLIT_RE = re.compile(r"[.?!]+")


def linguistic_features(
    transcript: Transcript,
    filler_set: frozenset[str] | set[str] = DEFAULT_FILLERS,
    stopword_set: frozenset[str] | set[str] = DEFAULT_STOPWORDS,
) -> LinguisticFeatures:
    """Compute the 11 linguistic features.

    Sentences are the token-bearing segments between ``.``, ``?`` and
    ``!`` in the raw text; unpunctuated non-empty transcripts count as one
    sentence.
    """
    tokens = transcript.tokens
    n_tokens = len(tokens)
    if n_tokens == 0:
        return LinguisticFeatures(0, 0, 0.0, 0.0, 0, 0.0, 0, 0, 0.0, 0.0, 0.0)

    counts: dict[str, int] = {}
    for tok in tokens:
        counts[tok] = counts.get(tok, 0) + 1
    n_types = len(counts)
    n_hapax = sum(1 for c in counts.values() if c == 1)
    n_sentences = sum(1 for part in _SENTENCE_SPLIT_RE.split(transcript.raw) if tokenize(part))
    n_content = sum(1 for tok in tokens if tok not in stopword_set)
    return LinguisticFeatures(
        n_tokens=n_tokens,
        n_types=n_types,
        type_token_ratio=n_types / n_tokens,
        mean_word_len_chars=sum(len(t) for t in tokens) / n_tokens,
        n_sentences=n_sentences,
        mean_sentence_len_tokens=n_tokens / n_sentences if n_sentences else 0.0,
        n_fillers=sum(1 for tok in tokens if tok in filler_set),
        n_immediate_repetitions=sum(1 for a, b in zip(tokens, tokens[1:]) if a == b),
        content_word_ratio=n_content / n_tokens,
        hapax_ratio=n_hapax / n_types,
        brunet_index=n_tokens ** (n_types**-0.165),
    )


@dataclass(frozen=True)
class MacroDescriptors:
    """Four ingested high-level transcript descriptors (opaque semantics)."""

    values: tuple[float, float, float, float]

    def __post_init__(self) -> None:
        if len(self.values) != 4 or not all(np.isfinite(v) for v in self.values):
            raise ValueError(f"expected 4 finite macrodescriptors, got {self.values!r}")

    def as_vector(self) -> np.ndarray:
        return np.array(self.values, dtype=np.float64)


def load_macrodescriptors(path: Path | str) -> dict[tuple[str, str], MacroDescriptors]:
    """Load a ``subject_id,task,m1,m2,m3,m4`` CSV keyed by (subject, task)."""
    out: dict[tuple[str, str], MacroDescriptors] = {}
    with open(path, newline="", encoding="utf-8") as fh:
        rows = list(csv.reader(fh))
    start = 1 if rows and rows[0][:2] == ["subject_id", "task"] else 0
    for row in rows[start:]:
        if not row:
            continue
        if len(row) != 6:
            raise ValueError(f"{path}: expected 6 fields per row, got {len(row)}")
        out[(row[0], row[1])] = MacroDescriptors(values=tuple(float(x) for x in row[2:]))
    return out


def load_disfluency_set(path: Path | str | None) -> frozenset[str]:
    """Load a one-word-per-line disfluency set; None means the default set."""
    if path is None:
        return DEFAULT_DISFLUENCIES
    return frozenset(
        line.strip().lower()
        for line in Path(path).read_text(encoding="utf-8").splitlines()
        if line.strip()
    )


def normalize_disfluencies(
    tokens,
    disfluency_set: frozenset[str] | set[str] = DEFAULT_DISFLUENCIES,
    placeholder: str = DISFLUENCY_PLACEHOLDER,
) -> list[str]:
    """Replace every disfluency token with a uniform placeholder (length-preserving)."""
    return [placeholder if tok in disfluency_set else tok for tok in tokens]


@dataclass(frozen=True)
class WerReport:
    """Edit counts from one minimum-edit alignment; ``wer`` may exceed 1."""

    substitutions: int
    deletions: int
    insertions: int
    n_ref: int

    @property
    def wer(self) -> float:
        return (self.substitutions + self.deletions + self.insertions) / self.n_ref

    @property
    def total_edits(self) -> int:
        return self.substitutions + self.deletions + self.insertions


def wer(ref_tokens, hyp_tokens) -> WerReport:
    """Word error rate via minimum-edit-distance alignment with unit costs.

    Ties in the backtrace prefer substitution over insertion over
    deletion, so S/D/I counts are deterministic.

    Raises:
        ValueError: empty reference.
    """
    ref = list(ref_tokens)
    hyp = list(hyp_tokens)
    n, m = len(ref), len(hyp)
    if n == 0:
        raise ValueError("reference must contain at least one token")

    dist = np.zeros((n + 1, m + 1), dtype=np.int64)
    dist[:, 0] = np.arange(n + 1)
    dist[0, :] = np.arange(m + 1)
    for i in range(1, n + 1):
        for j in range(1, m + 1):
            sub = dist[i - 1, j - 1] + (ref[i - 1] != hyp[j - 1])
            dist[i, j] = min(sub, dist[i, j - 1] + 1, dist[i - 1, j] + 1)

    subs = dels = ins = 0
    i, j = n, m
    while i > 0 or j > 0:
        if i > 0 and j > 0 and dist[i, j] == dist[i - 1, j - 1] + (ref[i - 1] != hyp[j - 1]):
            subs += ref[i - 1] != hyp[j - 1]
            i, j = i - 1, j - 1
        elif j > 0 and dist[i, j] == dist[i, j - 1] + 1:
            ins += 1
            j -= 1
        else:
            dels += 1
            i -= 1
    return WerReport(substitutions=int(subs), deletions=dels, insertions=ins, n_ref=n)
