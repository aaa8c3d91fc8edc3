"""Experiment configuration: the system roster and every tunable default.

The config file is JSON (UTF-8). ``default_config()`` carries a roster of
ten systems spanning pause, fluency, linguistic, macrodescriptor, and
embedding features across the five classifier types; ``--dump-defaults``
prints it so a run can start from a copy.
"""

from __future__ import annotations

import json
from dataclasses import asdict, dataclass, field
from pathlib import Path

from .dsp import DenoiseConfig, VadConfig
from .ensemble import FusionHyper, SelectionCriteria

__all__ = ["SystemSpec", "ExperimentConfig", "ConfigError", "default_config"]

CLASSIFIER_KINDS = ("svm", "tree", "forest", "ffp", "softmax", "constant")
FEATURE_KINDS = ("pauses", "fluency", "ling", "macro")  # plus "embed:<SOURCE>"


class ConfigError(ValueError):
    """Raised for malformed or inconsistent experiment configuration."""


@dataclass(frozen=True)
class SystemSpec:
    """One single system: a feature recipe, a task scope, and a classifier.

    ``task`` is a task name or "ALL"; with "ALL", embedding blocks are the
    concatenation over the three tasks. ``pca_dim`` reduces each embedding
    block (fit on train subjects) before classification.
    """

    system_id: str
    task: str
    features: tuple[str, ...]
    classifier: str
    params: dict = field(default_factory=dict)
    pca_dim: int | None = None

    def __post_init__(self) -> None:
        if self.classifier not in CLASSIFIER_KINDS:
            raise ConfigError(f"{self.system_id}: unknown classifier {self.classifier!r}")
        if not self.features:
            raise ConfigError(f"{self.system_id}: empty feature list")
        for feat in self.features:
            if feat not in FEATURE_KINDS and not feat.startswith("embed:"):
                raise ConfigError(f"{self.system_id}: unknown feature producer {feat!r}")
        if self.task not in ("CTD", "PFT", "SFT", "ALL"):
            raise ConfigError(f"{self.system_id}: unknown task scope {self.task!r}")


@dataclass
class ExperimentConfig:
    """Everything a full pipeline run needs, resolvable from one JSON file."""

    manifest: Path
    workdir: Path
    seed: int = 7
    folds: int = 5
    systems: tuple[SystemSpec, ...] = ()
    vad: VadConfig = field(default_factory=VadConfig)
    denoise: DenoiseConfig = field(default_factory=DenoiseConfig)
    fusion: FusionHyper = field(default_factory=FusionHyper)
    criteria: SelectionCriteria = field(default_factory=SelectionCriteria)
    min_ensemble_size: int = 2
    max_ensemble_size: int = 6
    report_top: int = 2
    allow_missing_features: bool = False
    # Resource paths; None means the conventional location under the manifest dir.
    lexicon_words: Path | None = None
    lexicon_embeddings: Path | None = None
    macrodescriptors: Path | None = None
    embeddings_dir: Path | None = None
    disfluencies: Path | None = None

    def __post_init__(self) -> None:
        ids = [s.system_id for s in self.systems]
        if len(ids) != len(set(ids)):
            dupes = sorted({i for i in ids if ids.count(i) > 1})
            raise ConfigError(f"duplicate system ids: {dupes}")

    @property
    def manifest_dir(self) -> Path:
        m = Path(self.manifest)
        return m if m.is_dir() else m.parent

    def resource(self, override: Path | None, *default_parts: str) -> Path:
        return Path(override) if override else self.manifest_dir.joinpath(*default_parts)


def default_roster() -> tuple[SystemSpec, ...]:
    return (
        SystemSpec("fluency_sft_svm", "SFT", ("fluency",), "svm", {"C": 0.1}),
        SystemSpec("pauses_macro_pft_svm", "PFT", ("pauses", "macro"), "svm", {"C": 0.1}),
        SystemSpec("pauses_macro_sft_svm", "SFT", ("pauses", "macro"), "svm", {"C": 0.1}),
        SystemSpec("ecapa_sft_ffp", "SFT", ("embed:ECAPA",), "ffp", {"k": 20}),
        SystemSpec("ecapa_all_svm", "ALL", ("embed:ECAPA",), "svm", {"C": 0.0001}, pca_dim=40),
        SystemSpec(
            "ecapa_trillsson_all_svm",
            "ALL",
            ("embed:ECAPA", "embed:TRILLsson"),
            "svm",
            {"C": 0.0001},
            pca_dim=40,
        ),
        SystemSpec("ling_ctd_svm", "CTD", ("ling",), "svm", {"C": 0.1}),
        SystemSpec("pauses_pft_forest", "PFT", ("pauses",), "forest", {"n_trees": 50, "max_depth": 6}),
        SystemSpec("ling_ctd_tree", "CTD", ("ling",), "tree", {"max_depth": 4}),
        SystemSpec("macro_sft_softmax", "SFT", ("macro",), "softmax", {"l2": 0.001, "lr": 0.1, "iters": 1000}),
    )


def default_config(manifest: Path | str = "corpus", workdir: Path | str = "work") -> ExperimentConfig:
    return ExperimentConfig(manifest=Path(manifest), workdir=Path(workdir), systems=default_roster())


def config_to_json(cfg: ExperimentConfig) -> str:
    payload = asdict(cfg)
    payload["manifest"] = str(cfg.manifest)
    payload["workdir"] = str(cfg.workdir)
    for key in ("lexicon_words", "lexicon_embeddings", "macrodescriptors", "embeddings_dir", "disfluencies"):
        if payload[key] is not None:
            payload[key] = str(payload[key])
    payload["systems"] = [
        {k: (list(v) if isinstance(v, tuple) else v) for k, v in asdict(s).items()}
        for s in cfg.systems
    ]
    payload["denoise"] = asdict(cfg.denoise)
    return json.dumps(payload, indent=2, sort_keys=True) + "\n"


def config_from_json(text: str, base_dir: Path | None = None) -> ExperimentConfig:
    """Parse a config JSON; relative paths resolve against ``base_dir``.

    Raises:
        ConfigError: unknown keys, bad types, or roster inconsistencies.
    """
    try:
        payload = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"config is not valid JSON: {exc}") from None
    if not isinstance(payload, dict):
        raise ConfigError("config must be a JSON object")

    def resolve(p):
        if p is None:
            return None
        p = Path(p)
        return (base_dir / p) if base_dir and not p.is_absolute() else p

    known = {
        "manifest",
        "workdir",
        "seed",
        "folds",
        "systems",
        "vad",
        "denoise",
        "fusion",
        "criteria",
        "min_ensemble_size",
        "max_ensemble_size",
        "report_top",
        "allow_missing_features",
        "lexicon_words",
        "lexicon_embeddings",
        "macrodescriptors",
        "embeddings_dir",
        "disfluencies",
    }
    unknown = set(payload) - known
    if unknown:
        raise ConfigError(f"unknown config keys: {sorted(unknown)}")
    if "manifest" not in payload or "workdir" not in payload:
        raise ConfigError("config must set 'manifest' and 'workdir'")

    try:
        vad = VadConfig(**payload.get("vad", {}))
        denoise_payload = dict(payload.get("denoise", {}))
        denoise_vad = denoise_payload.pop("vad", None)
        denoise = DenoiseConfig(
            **denoise_payload, vad=VadConfig(**denoise_vad) if denoise_vad else vad
        )
        fusion = FusionHyper(**payload.get("fusion", {}))
        criteria = SelectionCriteria(**payload.get("criteria", {}))
        systems = tuple(
            SystemSpec(
                system_id=s["system_id"],
                task=s["task"],
                features=tuple(s["features"]),
                classifier=s["classifier"],
                params=s.get("params", {}),
                pca_dim=s.get("pca_dim"),
            )
            for s in payload.get("systems", [])
        )
        return ExperimentConfig(
            manifest=resolve(payload["manifest"]),
            workdir=resolve(payload["workdir"]),
            seed=int(payload.get("seed", 7)),
            folds=int(payload.get("folds", 5)),
            systems=systems,
            vad=vad,
            denoise=denoise,
            fusion=fusion,
            criteria=criteria,
            min_ensemble_size=int(payload.get("min_ensemble_size", 2)),
            max_ensemble_size=int(payload.get("max_ensemble_size", 6)),
            report_top=int(payload.get("report_top", 2)),
            allow_missing_features=bool(payload.get("allow_missing_features", False)),
            lexicon_words=resolve(payload.get("lexicon_words")),
            lexicon_embeddings=resolve(payload.get("lexicon_embeddings")),
            macrodescriptors=resolve(payload.get("macrodescriptors")),
            embeddings_dir=resolve(payload.get("embeddings_dir")),
            disfluencies=resolve(payload.get("disfluencies")),
        )
    except (TypeError, KeyError) as exc:
        raise ConfigError(f"bad config structure: {exc}") from None


def load_config(path: Path | str) -> ExperimentConfig:
    path = Path(path)
    if not path.exists():
        raise ConfigError(f"config file not found: {path}")
    return config_from_json(path.read_text(encoding="utf-8"), base_dir=path.parent)
