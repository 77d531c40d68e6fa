from collections import Counter

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from dpdetect.corpus import PatternLabel
from dpdetect.errors import (
    SmoteInfeasibleError,
    StratificationInfeasibleError,
    UnknownLabelError,
)
from dpdetect.evaluation import (
    classification_metrics,
    cohen_kappa,
    confusion_matrix,
    f1_from_pr,
    smote_oversample,
    stratified_kfold,
)

TABLE_COUNTS = {
    "Adapter": 112, "Builder": 104, "Decorator": 104, "Factory": 123,
    "Facade": 102, "Memento": 100, "Observer": 102, "Prototype": 102,
    "Proxy": 111, "Singleton": 102, "Wrapper": 112, "Visitor": 104, "None": 122,
}


def table_labels():
    return [
        PatternLabel.from_token(name)
        for name, count in TABLE_COUNTS.items()
        for _ in range(count)
    ]


class TestStratifiedKfold:
    def test_exact_divisibility(self):
        y = ["A"] * 5 + ["B"] * 5
        fa = stratified_kfold(y, 5, seed=0)
        for fold in range(5):
            members = [y[i] for i in fa.test_indices(fold)]
            assert sorted(members) == ["A", "B"]

    def test_corpus_distribution_even_folds(self):
        y = table_labels()
        fa = stratified_kfold(y, 10, seed=1)
        sizes = np.bincount(fa.fold_of, minlength=10)
        assert (sizes == 140).all()
        adapter_idx = [i for i, v in enumerate(y) if v is PatternLabel.ADAPTER]
        adapter_per_fold = np.bincount(fa.fold_of[adapter_idx], minlength=10)
        assert set(adapter_per_fold) <= {11, 12}

    def test_small_class_rejected(self):
        y = ["A"] * 30 + ["B"] * 3
        with pytest.raises(StratificationInfeasibleError, match="B"):
            stratified_kfold(y, 10, seed=0)

    def test_k_validation(self):
        with pytest.raises(ValueError):
            stratified_kfold(["A", "B"], 1, seed=0)

    def test_deterministic(self):
        y = table_labels()
        a = stratified_kfold(y, 10, seed=9)
        b = stratified_kfold(y, 10, seed=9)
        assert np.array_equal(a.fold_of, b.fold_of)

    @given(
        counts=st.lists(st.integers(min_value=4, max_value=25), min_size=1, max_size=5),
        k=st.integers(min_value=2, max_value=4),
        seed=st.integers(min_value=0, max_value=2**31),
    )
    @settings(max_examples=60, deadline=None)
    def test_partition_property(self, counts, k, seed):
        y = [f"c{j}" for j, n in enumerate(counts) for _ in range(n)]
        fa = stratified_kfold(y, k, seed=seed)
        assert set(fa.fold_of) <= set(range(k))
        seen = np.zeros(len(y), dtype=int)
        for fold in range(k):
            seen[fa.test_indices(fold)] += 1
        assert (seen == 1).all()
        for j, n in enumerate(counts):
            idx = [i for i, v in enumerate(y) if v == f"c{j}"]
            per_fold = np.bincount(fa.fold_of[idx], minlength=k)
            assert (np.abs(per_fold - n / k) <= 1).all()


class TestSmote:
    def test_segment_between_two_points(self):
        X = np.array([[0.0, 0.0], [1.0, 1.0], [5.0, 5.0], [6.0, 6.0], [7.0, 7.0]])
        y = ["min", "min", "maj", "maj", "maj"]
        X2, y2 = smote_oversample(X, y, k_neighbors=1, seed=3)
        assert Counter(y2) == {"min": 3, "maj": 3}
        synth = X2[5]
        # new point is (t, t) for t in [0, 1]: on the segment between originals
        assert synth[0] == pytest.approx(synth[1], abs=1e-12)
        assert 0.0 <= synth[0] <= 1.0

    def test_balanced_input_is_identity(self):
        X = np.arange(12, dtype=float).reshape(6, 2)
        y = ["a", "a", "a", "b", "b", "b"]
        X2, y2 = smote_oversample(X, y, seed=0)
        assert np.array_equal(X2, X)
        assert y2 == y

    def test_corpus_distribution_balances_to_majority(self):
        y = table_labels()
        X = np.random.default_rng(5).random((len(y), 4))
        X2, y2 = smote_oversample(X, y, seed=7)
        counts = Counter(y2)
        assert set(counts.values()) == {123}
        assert len(y2) == 123 * 13
        # originals retained as a prefix
        assert np.array_equal(X2[: len(y)], X)

    def test_singleton_class_rejected(self):
        X = np.zeros((3, 2))
        with pytest.raises(SmoteInfeasibleError):
            smote_oversample(X, ["a", "a", "b"], seed=0)

    def test_synthetic_points_on_same_class_segments(self):
        rng = np.random.default_rng(11)
        X = rng.random((200, 2))
        y = ["maj"] * 140 + ["min"] * 60
        X2, y2 = smote_oversample(X, y, k_neighbors=5, seed=1)
        minority = X[140:]
        synth = X2[200:]
        assert len(synth) == 80
        pair_d = np.linalg.norm(minority[:, None, :] - minority[None, :, :], axis=2)
        for s in synth:
            d_to = np.linalg.norm(minority - s, axis=1)
            gap = d_to[:, None] + d_to[None, :] - pair_d
            np.fill_diagonal(gap, np.inf)
            assert gap.min() <= 1e-9

    def test_deterministic(self):
        X = np.random.default_rng(2).random((30, 3))
        y = ["a"] * 20 + ["b"] * 10
        a = smote_oversample(X, y, seed=5)
        b = smote_oversample(X, y, seed=5)
        assert np.array_equal(a[0], b[0]) and a[1] == b[1]


class TestConfusionMatrix:
    def test_diagonal_when_perfect(self):
        cm = confusion_matrix(["a", "b", "a"], ["a", "b", "a"], ["a", "b"])
        assert np.array_equal(cm.counts, [[2, 0], [0, 1]])

    def test_direct_count(self):
        cm = confusion_matrix(["A", "A", "B"], ["A", "B", "B"], ["A", "B"])
        assert np.array_equal(cm.counts, [[1, 1], [0, 1]])

    def test_empty(self):
        cm = confusion_matrix([], [], ["A", "B"])
        assert cm.counts.sum() == 0

    def test_unknown_label(self):
        with pytest.raises(UnknownLabelError):
            confusion_matrix(["z"], ["a"], ["a", "b"])
        with pytest.raises(UnknownLabelError):
            confusion_matrix(["a"], ["z"], ["a", "b"])


class TestMetrics:
    def test_f1_from_table_rows(self):
        assert f1_from_pr(81.82, 90.0) == pytest.approx(85.72, abs=0.01)
        assert f1_from_pr(88.24, 93.75) == pytest.approx(90.91, abs=0.01)
        assert f1_from_pr(0.0, 0.0) == 0.0

    def test_two_class_arithmetic(self):
        cm = confusion_matrix(
            ["a"] * 10 + ["b"] * 10,
            ["a"] * 8 + ["b"] * 2 + ["a"] * 1 + ["b"] * 9,
            ["a", "b"],
        )
        rep = classification_metrics(cm)
        assert rep.per_class["a"].precision == pytest.approx(100 * 8 / 9)
        assert rep.per_class["a"].recall == pytest.approx(80.0)
        assert rep.per_class["b"].precision == pytest.approx(100 * 9 / 11)
        assert rep.per_class["b"].recall == pytest.approx(90.0)

    def test_misclassification_180_140(self):
        labels = list(range(13))
        truth, pred = [], []
        diag = [11] * 12 + [8]
        support = [14] * 11 + [13] * 2
        for i in labels:
            truth += [i] * support[i]
            pred += [i] * diag[i] + [(i + 1) % 13] * (support[i] - diag[i])
        cm = confusion_matrix(truth, pred, labels)
        assert cm.total == 180 and cm.trace == 140
        rep = classification_metrics(cm)
        assert rep.misclassification == pytest.approx(0.2222222222, abs=1e-9)
        assert rep.misclassification < 0.23

    def test_undefined_precision_flagged_as_zero(self):
        cm = confusion_matrix(["a", "b"], ["a", "a"], ["a", "b"])
        rep = classification_metrics(cm)
        assert rep.per_class["b"].precision == 0.0
        assert rep.per_class["b"].undefined_precision

    def test_weighted_recall_equals_one_minus_m(self):
        rng = np.random.default_rng(3)
        labels = ["x", "y", "z"]
        truth = [labels[i] for i in rng.integers(0, 3, 300)]
        pred = [labels[i] for i in rng.integers(0, 3, 300)]
        rep = classification_metrics(confusion_matrix(truth, pred, labels))
        assert rep.weighted_recall / 100 == pytest.approx(1 - rep.misclassification, abs=1e-12)

    def test_f1_between_p_and_r(self):
        rng = np.random.default_rng(4)
        labels = ["x", "y"]
        truth = [labels[i] for i in rng.integers(0, 2, 100)]
        pred = [labels[i] for i in rng.integers(0, 2, 100)]
        rep = classification_metrics(confusion_matrix(truth, pred, labels))
        for cmx in rep.per_class.values():
            if not cmx.undefined_precision:
                assert min(cmx.precision, cmx.recall) - 1e-9 <= cmx.f1
                assert cmx.f1 <= max(cmx.precision, cmx.recall) + 1e-9


class TestCohenKappa:
    def test_identical_is_one(self):
        assert cohen_kappa(list("abcabc"), list("abcabc")) == 1.0

    def test_constructed_point_four(self):
        # p_o = 0.7 with 50/50 marginals for both raters -> p_e = 0.5
        a = ["x"] * 10 + ["y"] * 10
        b = ["x"] * 7 + ["y"] * 3 + ["y"] * 7 + ["x"] * 3
        assert cohen_kappa(a, b) == pytest.approx(0.4, abs=1e-9)

    def test_symmetric(self):
        rng = np.random.default_rng(5)
        a = [str(i) for i in rng.integers(0, 3, 60)]
        b = [str(i) for i in rng.integers(0, 3, 60)]
        assert cohen_kappa(a, b) == pytest.approx(cohen_kappa(b, a), abs=1e-12)

    def test_degenerate_marginals(self):
        assert cohen_kappa(["a", "a"], ["a", "a"]) == 1.0
        # both raters constant but different labels: p_e = 0, kappa = 0
        assert cohen_kappa(["a", "a"], ["b", "b"]) == 0.0

    def test_length_mismatch(self):
        with pytest.raises(ValueError):
            cohen_kappa(["a"], ["a", "b"])
