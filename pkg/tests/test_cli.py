from __future__ import annotations

import csv
import json
from pathlib import Path

import numpy as np
import pytest

from cogspeech.cli import main
from cogspeech.config import ExperimentConfig, SystemSpec, config_from_json, config_to_json
from cogspeech.corpus import load_manifest
from cogspeech.dsp import AudioBuffer, write_wav
from cogspeech.evaluation import SCORE_CSV_HEADER

from .conftest import write_manifest_csvs

SR = 16000


def small_roster() -> tuple[SystemSpec, ...]:
    """Mirrors the fluency SVM and the two pauses+macro SVMs, plus one
    PCA-reduced embedding system."""
    return (
        SystemSpec("fluency_sft_svm", "SFT", ("fluency",), "svm", {"C": 0.1}),
        SystemSpec("pauses_macro_pft_svm", "PFT", ("pauses", "macro"), "svm", {"C": 0.1}),
        SystemSpec("pauses_macro_sft_svm", "SFT", ("pauses", "macro"), "svm", {"C": 0.1}),
        SystemSpec("ecapa_all_svm", "ALL", ("embed:ECAPA",), "svm", {"C": 0.0001}, pca_dim=8),
    )


@pytest.fixture(scope="module")
def small_run(tmp_path_factory, corpus_dir):
    """features + run over the small roster, shared by the read-only tests."""
    workdir = tmp_path_factory.mktemp("work")
    cfg = ExperimentConfig(
        manifest=corpus_dir, workdir=workdir, seed=7, systems=small_roster()
    )
    cfg_path = workdir / "exp.json"
    cfg_path.write_text(config_to_json(cfg), encoding="utf-8")
    assert main(["features", "--config", str(cfg_path)]) == 0
    assert main(["run", "--config", str(cfg_path)]) == 0
    return cfg, cfg_path


class TestDumpDefaults:
    def test_prints_parseable_config(self, capsys):
        assert main(["--dump-defaults"]) == 0
        out = capsys.readouterr().out
        cfg = config_from_json(out)
        assert len(cfg.systems) == 10

    def test_no_command_prints_help(self, capsys):
        assert main([]) == 2


class TestSynthCommand:
    def test_synthesizes_corpus(self, tmp_path, capsys):
        out = tmp_path / "c"
        assert main(["synth", "--out", str(out), "--seed", "3"]) == 0
        assert "157 subjects" in capsys.readouterr().out
        manifest = load_manifest(out)
        assert len(manifest.subjects) == 157


class TestDenoiseCommand:
    @pytest.fixture()
    def mini_corpus(self, tmp_path):
        """Two tiny recordings: one clean, one with an unvoiced tone burst."""
        root = tmp_path / "mini"
        (root / "audio").mkdir(parents=True)
        t = np.arange(SR) / SR
        tone = 0.3 * np.sin(2 * np.pi * 220 * t)
        clean = np.concatenate([tone, np.zeros(SR), tone])
        write_wav(root / "audio" / "a_CTD.wav", AudioBuffer(clean, SR))
        burst_t = np.arange(int(0.06 * SR)) / SR
        burst = 0.7 * np.sin(2 * np.pi * 1000 * burst_t)
        noisy = np.concatenate([tone, np.zeros(SR), burst, np.zeros(SR)])
        write_wav(root / "audio" / "b_CTD.wav", AudioBuffer(noisy, SR))
        write_manifest_csvs(
            root,
            [
                ["a", "Male", "70", "HC", "", "Train"],
                ["b", "Female", "71", "MCI", "", "Train"],
            ],
            [
                ["a", "CTD", "audio/a_CTD.wav", ""],
                ["b", "CTD", "audio/b_CTD.wav", ""],
            ],
        )
        return root

    def _config(self, root, workdir):
        cfg = ExperimentConfig(manifest=root, workdir=workdir, systems=())
        path = workdir / "exp.json"
        workdir.mkdir(parents=True, exist_ok=True)
        path.write_text(config_to_json(cfg), encoding="utf-8")
        return path

    def test_clean_and_noisy_logged(self, mini_corpus, tmp_path):
        cfg_path = self._config(mini_corpus, tmp_path / "w")
        assert main(["denoise", "--config", str(cfg_path)]) == 0
        log = {
            row["file"]: row
            for row in csv.DictReader(open(tmp_path / "w" / "denoised" / "denoise_log.csv"))
        }
        assert log["a_CTD.wav"]["replaced_frames"] == "0"
        assert int(log["b_CTD.wav"]["replaced_frames"]) >= 1
        assert (tmp_path / "w" / "denoised" / "a_CTD.wav").exists()

    def test_missing_audio_partial_failure(self, mini_corpus, tmp_path):
        (mini_corpus / "audio" / "b_CTD.wav").unlink()
        cfg_path = self._config(mini_corpus, tmp_path / "w")
        assert main(["denoise", "--config", str(cfg_path)]) == 1
        log = list(csv.DictReader(open(tmp_path / "w" / "denoised" / "denoise_log.csv")))
        statuses = {row["file"]: row["status"] for row in log}
        assert statuses["a_CTD.wav"] == "ok"
        assert statuses["b_CTD.wav"].startswith("error")

    def test_flag_overrides_accepted(self, mini_corpus, tmp_path):
        cfg_path = self._config(mini_corpus, tmp_path / "w")
        assert (
            main(
                [
                    "denoise",
                    "--config",
                    str(cfg_path),
                    "--margin-db",
                    "25",
                    "--floor-quantile",
                    "0.2",
                ]
            )
            == 0
        )


class TestRunCommand:
    def test_score_csv_shape(self, small_run):
        cfg, _ = small_run
        for system in cfg.systems:
            path = Path(cfg.workdir) / "scores" / f"{system.system_id}.csv"
            rows = list(csv.reader(open(path)))
            assert rows[0] == SCORE_CSV_HEADER
            body = rows[1:]
            assert len(body) == 117 + 40
            assert sum(1 for r in body if r[2] == "Train") == 117
            assert sum(1 for r in body if r[2] == "Dev") == 40

    def test_metrics_json_written(self, small_run):
        cfg, _ = small_run
        payload = json.loads(
            (Path(cfg.workdir) / "metrics" / "fluency_sft_svm.json").read_text()
        )
        assert payload["n_oof"] == 117
        assert payload["n_dev"] == 40
        assert 0.0 <= payload["train"]["uaf1"] <= 100.0

    def test_rerun_byte_identical(self, small_run):
        cfg, cfg_path = small_run
        scores = {
            p.name: p.read_bytes() for p in (Path(cfg.workdir) / "scores").glob("*.csv")
        }
        assert main(["run", "--config", str(cfg_path)]) == 0
        for p in (Path(cfg.workdir) / "scores").glob("*.csv"):
            assert p.read_bytes() == scores[p.name]

    def test_constant_baseline_roster(self, corpus_dir, tmp_path):
        """A one-system constant-prediction roster still yields a valid CSV."""
        workdir = tmp_path / "w"
        workdir.mkdir()
        cfg = ExperimentConfig(
            manifest=corpus_dir,
            workdir=workdir,
            systems=(SystemSpec("always_hc", "CTD", ("macro",), "constant", {"target": 0}),),
        )
        cfg_path = workdir / "exp.json"
        cfg_path.write_text(config_to_json(cfg), encoding="utf-8")
        assert main(["features", "--config", str(cfg_path)]) == 0
        assert main(["run", "--config", str(cfg_path)]) == 0
        rows = list(csv.reader(open(workdir / "scores" / "always_hc.csv")))[1:]
        assert len(rows) == 157
        assert all(float(r[4]) == 1.0 for r in rows)  # score_hc column
        payload = json.loads((workdir / "metrics" / "always_hc.json").read_text())
        assert payload["train"]["f1"][2] == 0.0  # dementia F1 is zero

    def test_run_without_features_is_config_error(self, corpus_dir, tmp_path):
        workdir = tmp_path / "w"
        workdir.mkdir()
        cfg = ExperimentConfig(
            manifest=corpus_dir,
            workdir=workdir,
            systems=(SystemSpec("lonely", "SFT", ("pauses",), "svm"),),
        )
        cfg_path = workdir / "exp.json"
        cfg_path.write_text(config_to_json(cfg), encoding="utf-8")
        assert main(["run", "--config", str(cfg_path)]) == 2


class TestEnsembleCommand:
    def test_two_systems_single_row(self, small_run, corpus_dir, tmp_path):
        cfg, _ = small_run
        pair = ExperimentConfig(
            manifest=corpus_dir,
            workdir=cfg.workdir,
            seed=7,
            systems=cfg.systems[:2],
        )
        cfg_path = tmp_path / "pair.json"
        cfg_path.write_text(config_to_json(pair), encoding="utf-8")
        assert main(["ensemble", "--config", str(cfg_path)]) == 0
        rows = list(csv.DictReader(open(Path(cfg.workdir) / "ensembles.csv")))
        assert len(rows) == 1
        assert rows[0]["members"].count("+") == 1

    def test_selected_rows_have_positive_dementia_f1(self, small_run, corpus_dir, tmp_path):
        cfg, cfg_path = small_run
        assert main(["ensemble", "--config", str(cfg_path)]) == 0
        selected = list(csv.DictReader(open(Path(cfg.workdir) / "selected.csv")))
        assert all(float(r["f1_dem"]) > 0.0 for r in selected)

    def test_candidate_metrics_recomputable_from_persisted_scores(
        self, small_run, corpus_dir
    ):
        """ensembles.csv rows must equal a fresh fusion built from the score CSVs."""
        from cogspeech.corpus import Split
        from cogspeech.ensemble import fuse_predict, fuse_train, load_system_output
        from cogspeech.evaluation import metrics_from_predictions
        from cogspeech.pipeline import labels_of

        cfg, cfg_path = small_run
        assert main(["ensemble", "--config", str(cfg_path)]) == 0
        manifest = load_manifest(corpus_dir)
        train_labels = labels_of(manifest, Split.TRAIN)
        dev_labels = labels_of(manifest, Split.DEV)
        rows = list(csv.DictReader(open(Path(cfg.workdir) / "ensembles.csv")))
        by_id = {
            s.system_id: load_system_output(Path(cfg.workdir) / "scores" / f"{s.system_id}.csv")
            for s in cfg.systems
        }
        for row in rows[:3]:
            members = [by_id[m] for m in row["members"].split("+")]
            fusion = fuse_train(members, train_labels, cfg.fusion)
            train_pred = fuse_predict(fusion, members, table="oof")
            ids = sorted(train_pred)
            train_metrics = metrics_from_predictions(
                [train_labels[s] for s in ids], [train_pred[s].prediction for s in ids]
            )
            dev_pred = fuse_predict(fusion, members, table="dev")
            dev_ids = sorted(s for s in dev_pred if s in dev_labels)
            dev_metrics = metrics_from_predictions(
                [dev_labels[s] for s in dev_ids], [dev_pred[s].prediction for s in dev_ids]
            )
            assert train_metrics.uaf1 == pytest.approx(float(row["train_uaf1"]), abs=1e-9)
            assert dev_metrics.uaf1 == pytest.approx(float(row["dev_uaf1"]), abs=1e-9)
            assert dev_metrics.f1[2] == pytest.approx(float(row["f1_dem"]), abs=1e-9)

    def test_report_recomputation_byte_identical(self, small_run):
        cfg, cfg_path = small_run
        report_dir = Path(cfg.workdir) / "report"
        before = {p.name: p.read_bytes() for p in report_dir.iterdir()}
        assert main(["report", "--config", str(cfg_path)]) == 0
        after = {p.name: p.read_bytes() for p in report_dir.iterdir()}
        assert before == after

    def test_single_system_roster_rejected(self, corpus_dir, tmp_path):
        cfg = ExperimentConfig(
            manifest=corpus_dir,
            workdir=tmp_path / "w",
            systems=(SystemSpec("only", "SFT", ("pauses",), "svm"),),
        )
        cfg_path = tmp_path / "exp.json"
        cfg_path.write_text(config_to_json(cfg), encoding="utf-8")
        assert main(["ensemble", "--config", str(cfg_path)]) == 2

    def test_fifteen_fake_systems_yield_9933_rows(self, tmp_path):
        """Row-count contract on a fabricated 15-system score set."""
        corpus = tmp_path / "c"
        train_rows = [[f"s{i}", "Male", "70", ["HC", "MCI", "Dementia"][i % 3], "", "Train"] for i in range(6)]
        dev_rows = [[f"d{i}", "Male", "70", ["HC", "MCI", "Dementia"][i % 3], "", "Dev"] for i in range(3)]
        write_manifest_csvs(corpus, train_rows + dev_rows, [])
        workdir = tmp_path / "w"
        scores_dir = workdir / "scores"
        scores_dir.mkdir(parents=True)
        rng = np.random.default_rng(0)
        systems = tuple(
            SystemSpec(f"sys{i:02d}", "SFT", ("pauses",), "svm") for i in range(15)
        )
        for spec in systems:
            with open(scores_dir / f"{spec.system_id}.csv", "w", newline="") as fh:
                writer = csv.writer(fh)
                writer.writerow(SCORE_CSV_HEADER)
                for r in train_rows:
                    writer.writerow(
                        [spec.system_id, r[0], "Train", 0]
                        + [repr(float(v)) for v in rng.normal(size=3)]
                        + ["distance"]
                    )
                for r in dev_rows:
                    writer.writerow(
                        [spec.system_id, r[0], "Dev", -1]
                        + [repr(float(v)) for v in rng.normal(size=3)]
                        + ["distance"]
                    )
        cfg = ExperimentConfig(manifest=corpus, workdir=workdir, systems=systems)
        cfg.fusion = type(cfg.fusion)(iters=2)
        cfg_path = tmp_path / "exp.json"
        cfg_path.write_text(config_to_json(cfg), encoding="utf-8")
        assert main(["ensemble", "--config", str(cfg_path)]) == 0
        with open(workdir / "ensembles.csv") as fh:
            n_rows = sum(1 for _ in fh) - 1
        assert n_rows == 9933


class TestWerCommand:
    def _write(self, d: Path, name: str, text: str):
        d.mkdir(parents=True, exist_ok=True)
        (d / name).write_text(text, encoding="utf-8")

    def test_identical_transcripts_zero_wer(self, tmp_path, capsys):
        for name, text in (("x_CTD.txt", "the cat sat"), ("x_PFT.txt", "pig pan")):
            self._write(tmp_path / "ref", name, text)
            self._write(tmp_path / "hyp", name, text)
        out_csv = tmp_path / "wer.csv"
        code = main(
            ["wer", "--ref", str(tmp_path / "ref"), "--hyp", str(tmp_path / "hyp"), "--out", str(out_csv)]
        )
        assert code == 0
        rows = {r["task"]: r for r in csv.DictReader(open(out_csv))}
        assert float(rows["All"]["wer_percent"]) == 0.0
        assert float(rows["CTD"]["wer_percent"]) == 0.0

    def test_known_edits_match_dp_oracle(self, tmp_path):
        self._write(tmp_path / "ref", "a_SFT.txt", "dog cat cow horse")
        self._write(tmp_path / "hyp", "a_SFT.txt", "dog cut cow")  # 1 sub + 1 del
        out_csv = tmp_path / "wer.csv"
        assert main(
            ["wer", "--ref", str(tmp_path / "ref"), "--hyp", str(tmp_path / "hyp"), "--out", str(out_csv)]
        ) == 0
        rows = {r["task"]: r for r in csv.DictReader(open(out_csv))}
        assert int(rows["SFT"]["substitutions"]) == 1
        assert int(rows["SFT"]["deletions"]) == 1
        assert float(rows["SFT"]["wer_percent"]) == pytest.approx(100.0 * 2 / 4)

    def test_disfluency_spelling_mismatch_normalized_to_zero(self, tmp_path):
        self._write(tmp_path / "ref", "a_CTD.txt", "um the cat")
        self._write(tmp_path / "hyp", "a_CTD.txt", "erm the cat")
        out_csv = tmp_path / "wer.csv"
        assert main(
            ["wer", "--ref", str(tmp_path / "ref"), "--hyp", str(tmp_path / "hyp"), "--out", str(out_csv)]
        ) == 0
        rows = {r["task"]: r for r in csv.DictReader(open(out_csv))}
        assert float(rows["All"]["wer_percent"]) == 0.0

    def test_custom_disfluency_file(self, tmp_path):
        self._write(tmp_path / "ref", "a_CTD.txt", "bla the cat")
        self._write(tmp_path / "hyp", "a_CTD.txt", "blah the cat")
        (tmp_path / "disfl.txt").write_text("bla\nblah\n", encoding="utf-8")
        out_csv = tmp_path / "wer.csv"
        assert main(
            [
                "wer", "--ref", str(tmp_path / "ref"), "--hyp", str(tmp_path / "hyp"),
                "--disfluencies", str(tmp_path / "disfl.txt"), "--out", str(out_csv),
            ]
        ) == 0
        rows = {r["task"]: r for r in csv.DictReader(open(out_csv))}
        assert float(rows["All"]["wer_percent"]) == 0.0

    def test_unpaired_file_is_error(self, tmp_path):
        self._write(tmp_path / "ref", "a_CTD.txt", "the cat")
        self._write(tmp_path / "ref", "b_CTD.txt", "the dog")
        self._write(tmp_path / "hyp", "a_CTD.txt", "the cat")
        assert main(["wer", "--ref", str(tmp_path / "ref"), "--hyp", str(tmp_path / "hyp")]) == 2
