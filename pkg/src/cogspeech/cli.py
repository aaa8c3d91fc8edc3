"""Command-line orchestration of the full pipeline.

Subcommands: synth, denoise, features, run, ensemble, wer, report. All
take ``--config`` (JSON; see ``cogspeech --dump-defaults``) and honor
``--seed``. Exit codes: 0 success, 1 partial per-file failures, 2
configuration errors.
"""

from __future__ import annotations

import argparse
import csv
import sys
from dataclasses import replace
from pathlib import Path

from .config import ConfigError, ExperimentConfig, config_to_json, default_config, load_config
from .corpus import ManifestError, Split, load_manifest, make_folds
from .dsp import denoise_with_stats, read_wav, write_wav
from .ensemble import frequency, load_system_output, save_candidates, save_frequency, search, select
from .evaluation import save_cv_result
from .pipeline import (
    FeatureContext,
    assemble_system_features,
    labels_of,
    run_system,
    save_feature_table,
    save_system_metrics,
)
from .report import build_report
from .synthetic import synth_corpus
from .text import Transcript, load_disfluency_set, normalize_disfluencies, wer

EXIT_OK = 0
EXIT_PARTIAL = 1
EXIT_CONFIG = 2


def _load_config_arg(args) -> ExperimentConfig:
    cfg = load_config(args.config)
    if getattr(args, "seed", None) is not None:
        cfg.seed = args.seed
    return cfg


def cmd_synth(args) -> int:
    manifest = synth_corpus(args.out, args.seed if args.seed is not None else 7)
    n_train = len(manifest.subjects_in(Split.TRAIN))
    n_dev = len(manifest.subjects_in(Split.DEV))
    print(
        f"synthesized {len(manifest.subjects)} subjects "
        f"({n_train} train, {n_dev} dev), {len(manifest.recordings)} recordings -> {args.out}"
    )
    return EXIT_OK


def cmd_denoise(args) -> int:
    cfg = _load_config_arg(args)
    dcfg = cfg.denoise
    if args.margin_db is not None:
        dcfg = replace(dcfg, margin_db=args.margin_db)
    if args.floor_quantile is not None:
        dcfg = replace(dcfg, floor_quantile=args.floor_quantile)
    dcfg = replace(dcfg, seed=cfg.seed)

    manifest = load_manifest(cfg.manifest)
    out_dir = Path(cfg.workdir) / "denoised"
    out_dir.mkdir(parents=True, exist_ok=True)
    log_rows = []
    failures = 0
    for ref in manifest.recordings:
        name = Path(ref.audio_path).name
        try:
            audio = read_wav(ref.audio_path)
            cleaned, n_replaced = denoise_with_stats(audio, dcfg)
            write_wav(out_dir / name, cleaned)
            log_rows.append([name, n_replaced, "ok"])
        except (OSError, ValueError) as exc:
            failures += 1
            log_rows.append([name, "", f"error: {exc}"])
    with open(out_dir / "denoise_log.csv", "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(["file", "replaced_frames", "status"])
        writer.writerows(log_rows)
    total_replaced = sum(r[1] for r in log_rows if r[2] == "ok")
    print(f"denoised {len(log_rows) - failures}/{len(log_rows)} files, "
          f"{total_replaced} frames replaced -> {out_dir}")
    if failures:
        print(f"{failures} file(s) failed; see denoise_log.csv", file=sys.stderr)
        return EXIT_PARTIAL
    return EXIT_OK


def cmd_features(args) -> int:
    cfg = _load_config_arg(args)
    manifest = load_manifest(cfg.manifest)
    ctx = FeatureContext(manifest=manifest, config=cfg)
    out_dir = Path(cfg.workdir) / "features"
    out_dir.mkdir(parents=True, exist_ok=True)
    for system in cfg.systems:
        names, train, dev = assemble_system_features(ctx, system)
        save_feature_table(out_dir / f"{system.system_id}.csv", names, train, dev)
        print(f"features[{system.system_id}]: {len(names)} dims, "
              f"{len(train)} train + {len(dev)} dev subjects")
    return EXIT_OK


def cmd_run(args) -> int:
    cfg = _load_config_arg(args)
    manifest = load_manifest(cfg.manifest)
    folds = make_folds(manifest, cfg.folds, cfg.seed)
    feature_dir = Path(cfg.workdir) / "features"
    scores_dir = Path(cfg.workdir) / "scores"
    metrics_dir = Path(cfg.workdir) / "metrics"
    scores_dir.mkdir(parents=True, exist_ok=True)
    metrics_dir.mkdir(parents=True, exist_ok=True)
    for system in cfg.systems:
        features_path = feature_dir / f"{system.system_id}.csv"
        if not features_path.exists():
            raise ConfigError(
                f"no feature table for {system.system_id!r}; run `cogspeech features` first"
            )
        result = run_system(
            system, features_path, manifest, folds, cfg.seed,
            allow_missing=cfg.allow_missing_features,
        )
        save_cv_result(result, scores_dir / f"{system.system_id}.csv")
        save_system_metrics(result, metrics_dir / f"{system.system_id}.json")
        dev_uaf1 = result.dev_metrics.uaf1 if result.dev_metrics else float("nan")
        print(
            f"run[{system.system_id}]: train UAF1 {result.train_metrics.uaf1:.1f}, "
            f"dev UAF1 {dev_uaf1:.1f}"
        )
    return EXIT_OK


def cmd_ensemble(args) -> int:
    cfg = _load_config_arg(args)
    if len(cfg.systems) < 2:
        raise ConfigError("ensemble search needs at least 2 systems in the roster")
    manifest = load_manifest(cfg.manifest)
    scores_dir = Path(cfg.workdir) / "scores"
    outputs = []
    for system in cfg.systems:
        path = scores_dir / f"{system.system_id}.csv"
        if not path.exists():
            raise ConfigError(f"no score CSV for {system.system_id!r}; run `cogspeech run` first")
        outputs.append(load_system_output(path))

    candidates = search(
        outputs,
        labels_of(manifest, Split.TRAIN),
        labels_of(manifest, Split.DEV),
        min_size=cfg.min_ensemble_size,
        max_size=cfg.max_ensemble_size,
        hyper=cfg.fusion,
    )
    selected = select(candidates, cfg.criteria)
    freqs, defined = frequency(selected, [s.system_id for s in cfg.systems])

    workdir = Path(cfg.workdir)
    save_candidates(candidates, workdir / "ensembles.csv")
    save_candidates(selected, workdir / "selected.csv")
    save_frequency(freqs, defined, workdir / "frequency.csv")
    build_report(cfg)

    print(f"evaluated {len(candidates)} candidate ensembles, {len(selected)} selected")
    for c in selected[: cfg.report_top]:
        print(
            f"  {'+'.join(c.members)}: train UAF1 {c.train_metrics.uaf1:.1f}, "
            f"dev UAF1 {c.dev_metrics.uaf1:.1f}, dev F1_Dem {c.dev_metrics.f1[2]:.1f}"
        )
    return EXIT_OK


_TASK_NAMES = ("CTD", "PFT", "SFT")


def _task_of_filename(name: str) -> str | None:
    for task in _TASK_NAMES:
        if f"_{task}" in name:
            return task
    return None


def cmd_wer(args) -> int:
    ref_dir = Path(args.ref)
    hyp_dir = Path(args.hyp)
    disfluencies = load_disfluency_set(args.disfluencies)
    ref_files = sorted(p.name for p in ref_dir.glob("*.txt"))
    hyp_files = sorted(p.name for p in hyp_dir.glob("*.txt"))
    if ref_files != hyp_files:
        odd = sorted(set(ref_files) ^ set(hyp_files))
        raise ConfigError(f"unpaired transcript file(s): {', '.join(odd[:8])}")
    if not ref_files:
        raise ConfigError(f"no .txt transcripts in {ref_dir}")

    edits = {t: [0, 0, 0, 0, 0] for t in ("All",) + _TASK_NAMES}  # S, D, I, n_ref, files
    for name in ref_files:
        ref_tokens = normalize_disfluencies(
            Transcript.from_raw((ref_dir / name).read_text(encoding="utf-8")).tokens, disfluencies
        )
        hyp_tokens = normalize_disfluencies(
            Transcript.from_raw((hyp_dir / name).read_text(encoding="utf-8")).tokens, disfluencies
        )
        report = wer(ref_tokens, hyp_tokens)
        buckets = ["All"]
        task = _task_of_filename(name)
        if task:
            buckets.append(task)
        for bucket in buckets:
            entry = edits[bucket]
            entry[0] += report.substitutions
            entry[1] += report.deletions
            entry[2] += report.insertions
            entry[3] += report.n_ref
            entry[4] += 1

    rows = []
    for bucket in ("All",) + _TASK_NAMES:
        s, d, i, n_ref, files = edits[bucket]
        rate = 100.0 * (s + d + i) / n_ref if n_ref else 0.0
        rows.append([bucket, files, f"{rate:.2f}", s, d, i, n_ref])
        print(f"{bucket:>4}: WER {rate:6.2f}%  (files {files}, S {s}, D {d}, I {i}, N {n_ref})")
    if args.out:
        with open(args.out, "w", newline="", encoding="utf-8") as fh:
            writer = csv.writer(fh)
            writer.writerow(["task", "n_files", "wer_percent", "substitutions", "deletions", "insertions", "n_ref"])
            writer.writerows(rows)
    return EXIT_OK


def cmd_report(args) -> int:
    cfg = _load_config_arg(args)
    report_dir = build_report(cfg)
    print(f"report written to {report_dir}")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="cogspeech",
        description="Cognitive-status classification pipeline: preprocessing, features, "
        "cross-validated training, and late-fusion ensemble search.",
    )
    parser.add_argument(
        "--dump-defaults",
        action="store_true",
        help="print the default experiment config as JSON and exit",
    )
    sub = parser.add_subparsers(dest="command")

    p_synth = sub.add_parser("synth", help="generate a synthetic corpus")
    p_synth.add_argument("--out", required=True, help="output corpus directory")
    p_synth.add_argument("--seed", type=int, default=None)
    p_synth.set_defaults(func=cmd_synth)

    p_denoise = sub.add_parser("denoise", help="energy-based noise removal over the manifest")
    p_denoise.add_argument("--config", required=True)
    p_denoise.add_argument("--seed", type=int, default=None)
    p_denoise.add_argument("--margin-db", type=float, default=None, dest="margin_db")
    p_denoise.add_argument("--floor-quantile", type=float, default=None, dest="floor_quantile")
    p_denoise.set_defaults(func=cmd_denoise)

    for name, func, help_text in (
        ("features", cmd_features, "assemble per-system feature tables"),
        ("run", cmd_run, "cross-validated training and scoring per system"),
        ("ensemble", cmd_ensemble, "exhaustive late-fusion search, selection, and report"),
        ("report", cmd_report, "rebuild the report bundle from persisted CSVs"),
    ):
        p = sub.add_parser(name, help=help_text)
        p.add_argument("--config", required=True)
        p.add_argument("--seed", type=int, default=None)
        p.set_defaults(func=func)

    p_wer = sub.add_parser("wer", help="WER table over paired ref/hyp transcript dirs")
    p_wer.add_argument("--ref", required=True, help="reference transcript directory")
    p_wer.add_argument("--hyp", required=True, help="hypothesis transcript directory")
    p_wer.add_argument("--disfluencies", default=None, help="one-per-line disfluency file")
    p_wer.add_argument("--out", default=None, help="optional output CSV path")
    p_wer.set_defaults(func=cmd_wer)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.dump_defaults:
        print(config_to_json(default_config()), end="")
        return EXIT_OK
    if not getattr(args, "command", None):
        parser.print_help()
        return EXIT_CONFIG
    try:
        return args.func(args)
    except (ConfigError, ManifestError, FileNotFoundError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
