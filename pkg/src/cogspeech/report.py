"""Report bundle: metric tables and SVG figures, rebuilt from persisted CSVs.

Nothing here reads in-memory state from earlier pipeline stages. Every
number is recomputed from the score CSVs plus manifest labels, or read
from ensembles.csv / frequency.csv, so the report can be regenerated at
any time and always agrees with what is on disk.
"""

from __future__ import annotations

import csv
from pathlib import Path

from .config import ExperimentConfig
from .corpus import Split, load_manifest
from .ensemble import load_system_output
from .evaluation import metrics_from_predictions
from .pipeline import labels_of
from .svgplot import bar_svg, scatter_svg, write_svg

__all__ = ["build_report"]


def _system_metric_rows(config: ExperimentConfig, manifest) -> list[dict]:
    train_labels = labels_of(manifest, Split.TRAIN)
    dev_labels = labels_of(manifest, Split.DEV)
    rows = []
    for system in config.systems:
        path = Path(config.workdir) / "scores" / f"{system.system_id}.csv"
        if not path.exists():
            continue
        output = load_system_output(path)
        oof_ids = sorted(output.oof)
        train = metrics_from_predictions(
            [train_labels[s] for s in oof_ids],
            [int(output.oof[s].argmax()) for s in oof_ids],
        )
        dev_ids = sorted(s for s in output.dev if s in dev_labels)
        dev = metrics_from_predictions(
            [dev_labels[s] for s in dev_ids],
            [int(output.dev[s].argmax()) for s in dev_ids],
        )
        rows.append({"system_id": system.system_id, "train": train, "dev": dev})
    return rows


def _read_ensembles_csv(path: Path) -> list[dict]:
    rows = []
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.DictReader(fh)
        for row in reader:
            rows.append(
                {
                    "members": row["members"],
                    "train_uaf1": float(row["train_uaf1"]),
                    "dev_uaf1": float(row["dev_uaf1"]),
                    "f1_hc": float(row["f1_hc"]),
                    "f1_mci": float(row["f1_mci"]),
                    "f1_dem": float(row["f1_dem"]),
                }
            )
    return rows


def _metric_line(name: str, train, dev) -> str:
    return (
        f"| {name} | {train.uaf1:.1f} | {train.f1[0]:.1f} | {train.f1[1]:.1f} "
        f"| {train.f1[2]:.1f} | {dev.uaf1:.1f} | {dev.f1[0]:.1f} | {dev.f1[1]:.1f} "
        f"| {dev.f1[2]:.1f} |"
    )


def build_report(config: ExperimentConfig) -> Path:
    """Write report.md plus the scatter and frequency SVGs; return the dir."""
    workdir = Path(config.workdir)
    report_dir = workdir / "report"
    report_dir.mkdir(parents=True, exist_ok=True)
    manifest = load_manifest(config.manifest)

    lines = ["# Ensemble experiment report", ""]

    system_rows = _system_metric_rows(config, manifest)
    if system_rows:
        lines += [
            "## Single systems (recomputed from score CSVs)",
            "",
            "| System | CV UAF1 | CV F1 HC | CV F1 MCI | CV F1 Dem "
            "| Dev UAF1 | Dev F1 HC | Dev F1 MCI | Dev F1 Dem |",
            "|---|---|---|---|---|---|---|---|---|",
        ]
        lines += [_metric_line(r["system_id"], r["train"], r["dev"]) for r in system_rows]
        lines.append("")

    ensembles_path = workdir / "ensembles.csv"
    selected_path = workdir / "selected.csv"
    if ensembles_path.exists():
        candidates = _read_ensembles_csv(ensembles_path)
        selected = _read_ensembles_csv(selected_path) if selected_path.exists() else []
        lines += [
            "## Ensemble search",
            "",
            f"- candidates evaluated: {len(candidates)}",
            f"- selected by criteria: {len(selected)}",
            "",
            f"## Top {config.report_top} selected ensembles",
            "",
            "| Members | Train UAF1 | Dev UAF1 | Dev F1 HC | Dev F1 MCI | Dev F1 Dem |",
            "|---|---|---|---|---|---|",
        ]
        for row in selected[: config.report_top]:
            lines.append(
                f"| {row['members']} | {row['train_uaf1']:.1f} | {row['dev_uaf1']:.1f} "
                f"| {row['f1_hc']:.1f} | {row['f1_mci']:.1f} | {row['f1_dem']:.1f} |"
            )
        lines.append("")

        points = [
            (row["train_uaf1"], row["dev_uaf1"], row["f1_dem"] == 0.0) for row in candidates
        ]
        write_svg(
            report_dir / "ensembles_scatter.svg",
            scatter_svg(
                points,
                title="Ensemble performance (amber: zero dementia F1)",
                xlabel="Train UAF1 (%)",
                ylabel="Dev UAF1 (%)",
            ),
        )
        lines.append("![ensemble scatter](ensembles_scatter.svg)")

    frequency_path = workdir / "frequency.csv"
    if frequency_path.exists():
        labels, values = [], []
        with open(frequency_path, newline="", encoding="utf-8") as fh:
            for row in csv.DictReader(fh):
                labels.append(row["system_id"])
                values.append(float(row["frequency"]))
        write_svg(
            report_dir / "system_frequency.svg",
            bar_svg(
                labels,
                values,
                title="System frequency in selected ensembles",
                ylabel="Selection frequency",
            ),
        )
        lines.append("![system frequency](system_frequency.svg)")
    lines.append("")

    report_path = report_dir / "report.md"
    report_path.write_text("\n".join(lines), encoding="utf-8")
    return report_dir
