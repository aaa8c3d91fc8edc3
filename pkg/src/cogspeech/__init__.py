"""Speech- and transcript-based three-class cognitive status classification.

The pipeline: corpus manifests and stratified folds, energy-based audio
cleanup and VAD, pause/fluency/linguistic features plus ingested neural
embeddings and macrodescriptors, a classifier zoo emitting per-class soft
decisions, cross-validated out-of-fold scoring, and exhaustive late-fusion
ensemble search with balanced-performance selection.
"""

from .acoustic import EmbeddingVector, PauseFeatures, PcaReducer, concat_embeddings, load_embedding, pause_features
from .classifiers import (
    Dataset,
    FfpClassifier,
    ForestClassifier,
    LinearSvmClassifier,
    ScoreKind,
    SoftDecision,
    SoftmaxRegression,
    TreeClassifier,
)
from .corpus import (
    ClassLabel,
    FoldPlan,
    Gender,
    Manifest,
    RecordingRef,
    Split,
    SubjectRecord,
    TaskKind,
    load_manifest,
    make_folds,
)
from .dsp import AudioBuffer, DenoiseConfig, VadConfig, VadSegmentation, denoise, frame_energy, read_wav, vad, write_wav
from .ensemble import (
    EnsembleCandidate,
    FusionModel,
    SelectionCriteria,
    SystemOutput,
    enumerate_subsets,
    frequency,
    fuse_predict,
    fuse_train,
    search,
    select,
)
from .evaluation import ConfusionMatrix, CvResult, MetricReport, confusion, metrics, run_cv
from .synthetic import synth_corpus
from .text import (
    FluencyFeatures,
    LinguisticFeatures,
    MacroDescriptors,
    TargetLexicon,
    Transcript,
    WerReport,
    extract_targets,
    fluency_features,
    linguistic_features,
    normalize_disfluencies,
    tokenize,
    wer,
)

__version__ = "0.1.0"
