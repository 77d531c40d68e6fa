"""Stratified K-fold CV, SMOTE oversampling, the P/R/F1/M metric suite,
confusion matrices and Cohen's kappa.

Metric conventions: per-class precision TP/(TP+FP), recall TP/(TP+FN)
and F1 = 2PR/(P+R), reported in percent; misclassification
M = 1 - trace/total stays a fraction.  A class nobody predicted gets
precision 0 with an ``undefined`` flag so weighted averages remain
defined.  Weighted averages use class support (confusion row sums).
"""
from __future__ import annotations

import csv
import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Sequence

import numpy as np

from .errors import (
    DegenerateMarginals,
    SmoteInfeasibleError,
    StratificationInfeasibleError,
    UnknownLabelError,
)


@dataclass(frozen=True)
class FoldAssignment:
    k: int
    fold_of: np.ndarray  # instance index -> fold id

    def test_indices(self, fold: int) -> np.ndarray:
        return np.nonzero(self.fold_of == fold)[0]

    def train_indices(self, fold: int) -> np.ndarray:
        return np.nonzero(self.fold_of != fold)[0]


def stratified_kfold(y: Sequence, k: int, seed: int) -> FoldAssignment:
    """Per-class shuffle then continued round-robin dealing across folds.

    Continuing the dealing offset from class to class keeps overall fold
    sizes within one of each other (exactly equal when k divides the
    total), while per-class fold counts stay within +-1 of n_c/k.
    """
    if k < 2:
        raise ValueError("k must be >= 2")
    y = list(y)
    rng = np.random.Generator(np.random.PCG64(seed))
    by_class: dict = {}
    for i, label in enumerate(y):
        by_class.setdefault(label, []).append(i)
    fold_of = np.empty(len(y), dtype=np.int64)
    offset = 0
    for label in sorted(by_class, key=str):
        indices = np.asarray(by_class[label], dtype=np.int64)
        if indices.shape[0] < k:
            raise StratificationInfeasibleError(
                f"class {label} has {indices.shape[0]} instances, fewer than k={k}"
            )
        perm = rng.permutation(indices)
        for j, idx in enumerate(perm):
            fold_of[idx] = (offset + j) % k
        offset = (offset + indices.shape[0]) % k
    return FoldAssignment(k=k, fold_of=fold_of)


def smote_oversample(
    X: np.ndarray,
    y: Sequence,
    k_neighbors: int = 5,
    seed: int = 0,
) -> tuple[np.ndarray, list]:
    """Oversample every non-majority class up to the majority count.

    Each synthetic point is x + t * (nn - x) with t uniform in [0, 1]
    and nn one of x's k nearest same-class neighbours (Euclidean).
    Originals are retained and returned first, in their input order.
    """
    if k_neighbors < 1:
        raise ValueError("k_neighbors must be >= 1")
    X = np.asarray(X, dtype=np.float64)
    y = list(y)
    if X.shape[0] != len(y):
        raise ValueError(f"|X|={X.shape[0]} but |y|={len(y)}")
    by_class: dict = {}
    for i, label in enumerate(y):
        by_class.setdefault(label, []).append(i)
    majority = max(len(v) for v in by_class.values())

    rng = np.random.Generator(np.random.PCG64(seed))
    new_rows: list[np.ndarray] = []
    new_labels: list = []
    for label in sorted(by_class, key=str):
        indices = by_class[label]
        need = majority - len(indices)
        if need == 0:
            continue
        if len(indices) < 2:
            raise SmoteInfeasibleError(
                f"class {label} has {len(indices)} instance(s); neighbours unavailable"
            )
        pts = X[indices]
        n_c = pts.shape[0]
        diff = pts[:, None, :] - pts[None, :, :]
        dist = np.sqrt((diff * diff).sum(axis=2))
        np.fill_diagonal(dist, np.inf)
        k_eff = min(k_neighbors, n_c - 1)
        # stable neighbour ranking: distance then index
        neighbour_ids = np.lexsort((np.tile(np.arange(n_c), (n_c, 1)), dist), axis=1)[:, :k_eff]
        for _ in range(need):
            base = int(rng.integers(0, n_c))
            nn = int(neighbour_ids[base, int(rng.integers(0, k_eff))])
            t = float(rng.random())
            new_rows.append(pts[base] + t * (pts[nn] - pts[base]))
            new_labels.append(label)
    if not new_rows:
        return X, y
    return np.vstack([X, np.asarray(new_rows)]), y + new_labels


@dataclass(frozen=True)
class ConfusionMatrix:
    label_order: tuple
    counts: np.ndarray  # rows = truth, columns = prediction

    @property
    def total(self) -> int:
        return int(self.counts.sum())

    @property
    def trace(self) -> int:
        return int(np.trace(self.counts))


def confusion_matrix(truth: Sequence, predicted: Sequence, label_order: Sequence) -> ConfusionMatrix:
    if len(truth) != len(predicted):
        raise ValueError(f"|truth|={len(truth)} but |predicted|={len(predicted)}")
    label_order = tuple(label_order)
    index = {label: i for i, label in enumerate(label_order)}
    counts = np.zeros((len(label_order), len(label_order)), dtype=np.int64)
    for t, p in zip(truth, predicted):
        if t not in index:
            raise UnknownLabelError(f"truth label outside label_order: {t!r}")
        if p not in index:
            raise UnknownLabelError(f"predicted label outside label_order: {p!r}")
        counts[index[t], index[p]] += 1
    return ConfusionMatrix(label_order=label_order, counts=counts)


def f1_from_pr(precision: float, recall: float) -> float:
    """Harmonic mean; 0 when both inputs are 0."""
    if precision + recall == 0:
        return 0.0
    return 2.0 * precision * recall / (precision + recall)


@dataclass(frozen=True)
class ClassMetrics:
    precision: float  # percent
    recall: float  # percent
    f1: float  # percent
    support: int
    undefined_precision: bool = False


@dataclass(frozen=True)
class MetricReport:
    per_class: dict
    weighted_precision: float  # percent
    weighted_recall: float  # percent
    weighted_f1: float  # percent
    misclassification: float  # fraction in [0, 1]
    confusion: ConfusionMatrix


def classification_metrics(m: ConfusionMatrix) -> MetricReport:
    counts = m.counts
    total = m.total
    if total < 1:
        raise ValueError("empty confusion matrix")
    per_class: dict = {}
    weighted_p = weighted_r = weighted_f1 = 0.0
    for i, label in enumerate(m.label_order):
        tp = float(counts[i, i])
        support = int(counts[i, :].sum())
        predicted = int(counts[:, i].sum())
        undefined = predicted == 0
        precision = 0.0 if undefined else 100.0 * tp / predicted
        recall = 0.0 if support == 0 else 100.0 * tp / support
        f1 = f1_from_pr(precision, recall)
        per_class[label] = ClassMetrics(
            precision=precision, recall=recall, f1=f1,
            support=support, undefined_precision=undefined,
        )
        weight = support / total
        weighted_p += weight * precision
        weighted_r += weight * recall
        weighted_f1 += weight * f1
    misclassification = 1.0 - m.trace / total
    return MetricReport(
        per_class=per_class,
        weighted_precision=weighted_p,
        weighted_recall=weighted_r,
        weighted_f1=weighted_f1,
        misclassification=misclassification,
        confusion=m,
    )


def cohen_kappa(ratings_a: Sequence, ratings_b: Sequence) -> float:
    """Chance-corrected agreement between two raters."""
    if len(ratings_a) != len(ratings_b):
        raise ValueError("rating vectors differ in length")
    n = len(ratings_a)
    if n == 0:
        raise ValueError("empty rating vectors")
    p_o = sum(1 for a, b in zip(ratings_a, ratings_b) if a == b) / n
    labels = set(ratings_a) | set(ratings_b)
    p_e = 0.0
    for label in labels:
        fa = sum(1 for a in ratings_a if a == label) / n
        fb = sum(1 for b in ratings_b if b == label) / n
        p_e += fa * fb
    if p_e == 1.0:
        if p_o == 1.0:
            return 1.0
        raise DegenerateMarginals("chance agreement is 1 but raters disagree")
    return (p_o - p_e) / (1.0 - p_e)


# ---------------------------------------------------------------------------
# Report container and writers
# ---------------------------------------------------------------------------


@dataclass
class EvalReport:
    metrics: MetricReport
    k: int
    seed: int
    per_fold: list[dict] = field(default_factory=list)
    config_echo: dict = field(default_factory=dict)

    def to_json(self) -> str:
        payload = {
            "k": self.k,
            "seed": self.seed,
            "weighted": {
                "precision": round(self.metrics.weighted_precision, 2),
                "recall": round(self.metrics.weighted_recall, 2),
                "f1": round(self.metrics.weighted_f1, 2),
            },
            "misclassification": round(self.metrics.misclassification, 6),
            "per_class": {
                str(getattr(label, "value", label)): {
                    "precision": round(cm.precision, 2),
                    "recall": round(cm.recall, 2),
                    "f1": round(cm.f1, 2),
                    "support": cm.support,
                    "undefined_precision": cm.undefined_precision,
                }
                for label, cm in self.metrics.per_class.items()
            },
            "per_fold": self.per_fold,
            "config": self.config_echo,
        }
        return json.dumps(payload, indent=2, sort_keys=True) + "\n"


def confusion_to_csv(m: ConfusionMatrix, path: str | Path) -> None:
    names = [str(getattr(label, "value", label)) for label in m.label_order]
    with Path(path).open("w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(["truth\\prediction"] + names)
        for i, name in enumerate(names):
            writer.writerow([name] + [int(x) for x in m.counts[i]])
