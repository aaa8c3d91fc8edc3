from __future__ import annotations

from itertools import combinations

import numpy as np
import pytest

from cogspeech.classifiers import ScoreKind
from cogspeech.ensemble import (
    CoverageError,
    EnsembleCandidate,
    FusionHyper,
    SelectionCriteria,
    SystemOutput,
    enumerate_subsets,
    frequency,
    fuse_predict,
    fuse_train,
    save_candidates,
    search,
    select,
)
from cogspeech.evaluation import MetricReport

from .oracles import bitmask_subset_count


class TestEnumerateSubsets:
    def test_fifteen_systems_paper_count(self):
        subsets = enumerate_subsets(15, 2, 6)
        assert len(subsets) == 9933  # 105 + 455 + 1365 + 3003 + 5005

    def test_matches_bitmask_oracle(self):
        for n, lo, hi in ((5, 2, 4), (8, 2, 6), (10, 1, 3), (15, 2, 6), (18, 2, 6)):
            assert len(enumerate_subsets(n, lo, hi)) == bitmask_subset_count(n, lo, hi)

    def test_pairs_only(self):
        assert enumerate_subsets(3, 2, 2) == [(0, 1), (0, 2), (1, 2)]

    def test_two_systems_single_subset(self):
        assert enumerate_subsets(2, 2, 6) == [(0, 1)]

    def test_lexicographic_within_and_across_sizes(self):
        subsets = enumerate_subsets(5, 2, 3)
        by_size = {k: [s for s in subsets if len(s) == k] for k in (2, 3)}
        assert by_size[2] == sorted(combinations(range(5), 2))
        assert by_size[3] == sorted(combinations(range(5), 3))
        assert subsets == by_size[2] + by_size[3]

    def test_too_few_systems(self):
        with pytest.raises(ValueError, match="subsets"):
            enumerate_subsets(1, 2, 6)


def one_hot(label: int, soft: float = 0.9) -> np.ndarray:
    rest = (1.0 - soft) / 2.0
    scores = np.full(3, rest)
    scores[label] = soft
    return scores


def make_outputs(rng, n_train=18, n_dev=9):
    """Three systems: perfect one-hot, noisy, and constant-column."""
    train_ids = [f"t{i:02d}" for i in range(n_train)]
    dev_ids = [f"d{i:02d}" for i in range(n_dev)]
    train_labels = {sid: i % 3 for i, sid in enumerate(train_ids)}
    dev_labels = {sid: i % 3 for i, sid in enumerate(dev_ids)}

    perfect = SystemOutput(
        "perfect",
        {sid: one_hot(train_labels[sid]) for sid in train_ids},
        {sid: one_hot(dev_labels[sid]) for sid in dev_ids},
        ScoreKind.SOFTMAX,
    )
    noisy = SystemOutput(
        "noisy",
        {sid: rng.normal(size=3) for sid in train_ids},
        {sid: rng.normal(size=3) for sid in dev_ids},
        ScoreKind.DISTANCE,
    )
    constant = SystemOutput(
        "constant",
        {sid: np.array([0.5, 0.25, 0.25]) for sid in train_ids},
        {sid: np.array([0.5, 0.25, 0.25]) for sid in dev_ids},
        ScoreKind.PROBABILITY,
    )
    return perfect, noisy, constant, train_labels, dev_labels


class TestFusion:
    def test_perfect_member_gives_perfect_train(self, rng):
        perfect, noisy, _, train_labels, _ = make_outputs(rng)
        fusion = fuse_train([perfect, noisy], train_labels)
        preds = fuse_predict(fusion, [perfect, noisy], table="oof")
        assert all(preds[sid].prediction == train_labels[sid] for sid in train_labels)

    def test_identical_members_match_single_member_argmax(self, rng):
        perfect, _, _, train_labels, _ = make_outputs(rng)
        twin = SystemOutput("twin", dict(perfect.oof), dict(perfect.dev), perfect.kind)
        fusion = fuse_train([perfect, twin], train_labels)
        preds = fuse_predict(fusion, [perfect, twin], table="dev")
        for sid, decision in preds.items():
            assert decision.prediction == int(np.argmax(perfect.dev[sid]))

    def test_constant_column_stays_finite(self, rng):
        perfect, _, constant, train_labels, _ = make_outputs(rng)
        fusion = fuse_train([perfect, constant], train_labels)
        preds = fuse_predict(fusion, [perfect, constant], table="dev")
        for decision in preds.values():
            assert np.all(np.isfinite(decision.scores))
            assert decision.scores.sum() == pytest.approx(1.0, abs=1e-9)

    def test_memorized_row_same_prediction_as_training_time(self, rng):
        perfect, noisy, _, train_labels, _ = make_outputs(rng)
        fusion = fuse_train([perfect, noisy], train_labels)
        train_preds = fuse_predict(fusion, [perfect, noisy], table="oof")
        sid = sorted(train_labels)[0]
        echo_a = SystemOutput("perfect", {sid: perfect.oof[sid]}, {sid: perfect.oof[sid]}, perfect.kind)
        echo_b = SystemOutput("noisy", {sid: noisy.oof[sid]}, {sid: noisy.oof[sid]}, noisy.kind)
        echoed = fuse_predict(fusion, [echo_a, echo_b], table="dev")
        assert np.allclose(echoed[sid].scores, train_preds[sid].scores, atol=1e-12)

    def test_six_members_dimension_eighteen(self, rng):
        perfect, noisy, constant, train_labels, _ = make_outputs(rng)
        members = [perfect, noisy, constant]
        for i in range(3):
            clone = SystemOutput(f"c{i}", dict(noisy.oof), dict(noisy.dev), noisy.kind)
            members.append(clone)
        fusion = fuse_train(members, train_labels, FusionHyper(iters=5))
        assert fusion.input_dim == 18
        assert fusion.model.weights_.shape == (3, 19)

    def test_fewer_than_two_members_rejected(self, rng):
        perfect, _, _, train_labels, _ = make_outputs(rng)
        with pytest.raises(ValueError, match="at least 2"):
            fuse_train([perfect], train_labels)

    def test_coverage_mismatch_raises(self, rng):
        perfect, noisy, _, train_labels, _ = make_outputs(rng)
        broken = SystemOutput(
            "broken",
            {sid: v for sid, v in noisy.oof.items() if sid != "t00"},
            dict(noisy.dev),
            noisy.kind,
        )
        with pytest.raises(CoverageError, match="t00"):
            fuse_train([perfect, broken], train_labels)

    def test_member_order_mismatch_raises(self, rng):
        perfect, noisy, _, train_labels, _ = make_outputs(rng)
        fusion = fuse_train([perfect, noisy], train_labels)
        with pytest.raises(ValueError, match="order"):
            fuse_predict(fusion, [noisy, perfect], table="dev")

    def test_zero_weight_fusion_uniform(self, rng):
        perfect, noisy, _, train_labels, _ = make_outputs(rng)
        fusion = fuse_train([perfect, noisy], train_labels)
        fusion.model.weights_ = np.zeros_like(fusion.model.weights_)
        preds = fuse_predict(fusion, [perfect, noisy], table="dev")
        for decision in preds.values():
            assert np.allclose(decision.scores, 1.0 / 3.0)


class TestSearch:
    def test_evaluates_every_subset(self, rng):
        perfect, noisy, constant, train_labels, dev_labels = make_outputs(rng)
        candidates = search(
            [perfect, noisy, constant], train_labels, dev_labels, hyper=FusionHyper(iters=30)
        )
        assert len(candidates) == 4  # C(3,2) + C(3,3)
        members = {c.members for c in candidates}
        assert ("perfect", "noisy") in members
        assert ("perfect", "noisy", "constant") in members

    def test_ranking_is_deterministic_bytes(self, rng, tmp_path):
        perfect, noisy, constant, train_labels, dev_labels = make_outputs(rng)
        outputs = [perfect, noisy, constant]
        a = search(outputs, train_labels, dev_labels, hyper=FusionHyper(iters=30))
        b = search(outputs, train_labels, dev_labels, hyper=FusionHyper(iters=30))
        save_candidates(a, tmp_path / "a.csv")
        save_candidates(b, tmp_path / "b.csv")
        assert (tmp_path / "a.csv").read_bytes() == (tmp_path / "b.csv").read_bytes()

    def test_ranked_by_balanced_uaf1(self, rng):
        perfect, noisy, constant, train_labels, dev_labels = make_outputs(rng)
        candidates = search(
            [perfect, noisy, constant], train_labels, dev_labels, hyper=FusionHyper(iters=30)
        )
        keys = [min(c.train_metrics.uaf1, c.dev_metrics.uaf1) for c in candidates]
        assert keys == sorted(keys, reverse=True)

    def test_dev_labels_only_affect_evaluation(self, rng):
        """Permuting dev labels must not change fused predictions or train metrics."""
        perfect, noisy, constant, train_labels, dev_labels = make_outputs(rng)
        outputs = [perfect, noisy, constant]
        shuffled_ids = sorted(dev_labels)
        permuted = {
            sid: dev_labels[shuffled_ids[(i + 1) % len(shuffled_ids)]]
            for i, sid in enumerate(shuffled_ids)
        }
        a = search(outputs, train_labels, dev_labels, hyper=FusionHyper(iters=30))
        b = search(outputs, train_labels, permuted, hyper=FusionHyper(iters=30))
        train_a = {c.members: c.train_metrics for c in a}
        train_b = {c.members: c.train_metrics for c in b}
        assert train_a == train_b
        # Dev predictions are label-independent: recompute one candidate's dev
        # metrics from a fresh fusion and both label sets.
        fusion = fuse_train([perfect, noisy], train_labels, FusionHyper(iters=30))
        preds = fuse_predict(fusion, [perfect, noisy], table="dev")
        from cogspeech.evaluation import metrics_from_predictions

        ids = sorted(preds)
        for labels, results in ((dev_labels, a), (permuted, b)):
            expected = metrics_from_predictions(
                [labels[s] for s in ids], [preds[s].prediction for s in ids]
            )
            got = {c.members: c.dev_metrics for c in results}[("perfect", "noisy")]
            assert got == expected


def report(uaf1, f1_dem=10.0):
    f1 = (uaf1, uaf1, f1_dem)
    return MetricReport(uaf1=uaf1, f1=f1, precision=f1, recall=f1)


def candidate(members, train_uaf1, dev_uaf1, dev_f1_dem):
    return EnsembleCandidate(
        members=members,
        train_metrics=report(train_uaf1),
        dev_metrics=report(dev_uaf1, dev_f1_dem),
    )


class TestSelect:
    def test_zero_dementia_excluded(self):
        cands = [candidate(("a", "b"), 80.0, 80.0, 0.0)]
        assert select(cands) == []

    def test_just_above_thresholds_included(self):
        cands = [candidate(("a", "b"), 56.0, 56.0, 10.0)]
        assert select(cands) == cands

    def test_at_threshold_excluded(self):
        cands = [candidate(("a", "b"), 55.0, 80.0, 10.0)]
        assert select(cands) == []

    def test_empty_input(self):
        assert select([]) == []

    def test_vacuous_criteria_keep_everything(self):
        cands = [
            candidate(("a", "b"), 10.0, 10.0, 5.0),
            candidate(("a", "c"), 20.0, 20.0, 0.1),
        ]
        criteria = SelectionCriteria(min_train_uaf1=0.0, min_dev_uaf1=0.0, min_dementia_f1=0.0)
        assert select(cands, criteria) == cands

    def test_order_stable(self):
        cands = [
            candidate(("a", "b"), 70.0, 70.0, 5.0),
            candidate(("a", "c"), 60.0, 60.0, 5.0),
            candidate(("b", "c"), 80.0, 80.0, 0.0),
        ]
        assert select(cands) == [cands[0], cands[1]]


class TestFrequency:
    def test_always_selected_system(self):
        cands = [candidate(("s3", "s1"), 60, 60, 5), candidate(("s3", "s2"), 60, 60, 5)]
        freqs, defined = frequency(cands, ["s1", "s2", "s3"])
        assert defined
        assert freqs["s3"] == 1.0

    def test_absent_system_zero(self):
        cands = [candidate(("s1", "s2"), 60, 60, 5)]
        freqs, _ = frequency(cands, ["s1", "s2", "s3"])
        assert freqs["s3"] == 0.0

    def test_half_frequency(self):
        cands = [candidate(("s1", "s2"), 60, 60, 5), candidate(("s2", "s3"), 60, 60, 5)]
        freqs, _ = frequency(cands, ["s1", "s2", "s3"])
        assert freqs["s1"] == 0.5

    def test_empty_selection_flagged(self):
        freqs, defined = frequency([], ["s1", "s2"])
        assert not defined
        assert set(freqs.values()) == {0.0}
