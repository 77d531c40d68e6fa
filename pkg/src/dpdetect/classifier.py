"""Averaged ensemble of extremely randomized trees (random-forest variant
behind a mode flag).

``extra`` mode grows each tree on the full sample with one uniform
random threshold per candidate feature; ``random_forest`` bootstraps
the sample and searches all thresholds per candidate.  Either way the
candidate set is max_features random features, split quality is Gini
decrease, growth stops at purity / min_samples_split / max_depth, and
per-tree randomness derives deterministically from the ensemble seed,
so fitting is reproducible regardless of scheduling.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from ._trees import grow_tree, leaf_ids, max_node_count
from .embedding import FileVector
from .errors import DimensionError, EmptyTrainingError

_RAW_HIGH = 2**62


@dataclass(frozen=True)
class EnsembleParams:
    n_trees: int = 100
    max_features: str | int = "sqrt"  # "sqrt", "all" or an explicit count
    min_samples_split: int = 2
    max_depth: int | None = None
    mode: str = "extra"  # "extra" | "random_forest"
    seed: int = 0

    def __post_init__(self):
        if self.n_trees < 1:
            raise ValueError("n_trees must be >= 1")
        if self.min_samples_split < 2:
            raise ValueError("min_samples_split must be >= 2")
        if self.mode not in ("extra", "random_forest"):
            raise ValueError(f"unknown mode {self.mode!r}")
        if isinstance(self.max_features, str) and self.max_features not in ("sqrt", "all"):
            raise ValueError(f"unknown max_features {self.max_features!r}")

    def feature_count(self, dim: int) -> int:
        if self.max_features == "sqrt":
            return max(1, int(np.sqrt(dim)))
        if self.max_features == "all":
            return dim
        return max(1, min(int(self.max_features), dim))


@dataclass(frozen=True)
class TreeNode:
    """View of one node: internal (feature/threshold/children) or leaf."""

    feature_index: int
    threshold: float
    left: int
    right: int
    class_counts: np.ndarray

    @property
    def is_leaf(self) -> bool:
        return self.feature_index < 0


@dataclass
class Tree:
    feature: np.ndarray
    threshold: np.ndarray
    left: np.ndarray
    right: np.ndarray
    counts: np.ndarray  # (n_nodes, n_classes) int64

    @property
    def n_nodes(self) -> int:
        return int(self.feature.shape[0])

    def node(self, i: int) -> TreeNode:
        return TreeNode(
            feature_index=int(self.feature[i]),
            threshold=float(self.threshold[i]),
            left=int(self.left[i]),
            right=int(self.right[i]),
            class_counts=self.counts[i],
        )


@dataclass
class TreeEnsemble:
    trees: list[Tree]
    n_classes: int
    label_order: tuple
    params: EnsembleParams
    dim: int
    _leaf_proba: list[np.ndarray] = field(default_factory=list, repr=False)

    def __post_init__(self):
        if not self._leaf_proba:
            for tree in self.trees:
                totals = tree.counts.sum(axis=1, keepdims=True)
                totals[totals == 0] = 1
                self._leaf_proba.append(tree.counts / totals)


def _as_matrix(X: Sequence[FileVector] | np.ndarray) -> np.ndarray:
    if isinstance(X, np.ndarray):
        mat = np.asarray(X, dtype=np.float64)
        if mat.ndim != 2:
            raise DimensionError(f"expected a 2-D matrix, got shape {mat.shape}")
        return np.ascontiguousarray(mat)
    rows = []
    dim = None
    for item in X:
        values = item.values if isinstance(item, FileVector) else np.asarray(item, dtype=np.float64)
        if dim is None:
            dim = values.shape[0]
        elif values.shape[0] != dim:
            raise DimensionError(f"inconsistent vector dimensions: {values.shape[0]} vs {dim}")
        rows.append(values)
    return np.ascontiguousarray(np.asarray(rows, dtype=np.float64))


def fit(
    X: Sequence[FileVector] | np.ndarray,
    y: Sequence,
    p: EnsembleParams,
    label_order: Sequence | None = None,
    use_numba: bool | None = None,
) -> TreeEnsemble:
    """Fit the ensemble on vectors + labels.

    Labels may be any sortable values (PatternLabel included); the label
    order is fixed at fit time, defaulting to sorted unique labels.
    """
    mat = _as_matrix(X)
    n, d = mat.shape
    if n == 0 or len(y) == 0:
        raise EmptyTrainingError("no training instances")
    if len(y) != n:
        raise DimensionError(f"|X|={n} but |y|={len(y)}")
    if label_order is None:
        label_order = tuple(sorted(set(y)))
    else:
        label_order = tuple(label_order)
        missing = set(y) - set(label_order)
        if missing:
            raise ValueError(f"labels outside label_order: {missing}")
    index_of = {label: i for i, label in enumerate(label_order)}
    y_idx = np.asarray([index_of[label] for label in y], dtype=np.int32)
    n_classes = len(label_order)

    m = p.feature_count(d)
    max_depth = -1 if p.max_depth is None else int(p.max_depth)
    is_extra = p.mode == "extra"
    cap = max_node_count(n)

    seeds = np.random.SeedSequence(p.seed).spawn(p.n_trees)
    trees: list[Tree] = []
    for tree_seed in seeds:
        rng = np.random.Generator(np.random.PCG64(tree_seed))
        if is_extra:
            sample_idx = np.arange(n, dtype=np.int64)
        else:
            sample_idx = rng.integers(0, n, size=n, dtype=np.int64)
        feat_raw = rng.integers(0, _RAW_HIGH, size=(cap, m), dtype=np.int64)
        unis = rng.random((cap, m))
        feature, threshold, left, right, counts = grow_tree(
            mat, y_idx, n_classes, sample_idx, feat_raw, unis, m,
            p.min_samples_split, max_depth, is_extra, use_numba=use_numba,
        )
        trees.append(Tree(feature, threshold, left, right, counts))
    return TreeEnsemble(trees=trees, n_classes=n_classes, label_order=label_order, params=p, dim=d)


def _probe_matrix(e: TreeEnsemble, x: np.ndarray) -> tuple[np.ndarray, bool]:
    arr = np.asarray(x, dtype=np.float64)
    single = arr.ndim == 1
    if single:
        arr = arr[None, :]
    if arr.ndim != 2 or arr.shape[1] != e.dim:
        raise DimensionError(f"expected vectors of dimension {e.dim}, got shape {np.asarray(x).shape}")
    return np.ascontiguousarray(arr), single


def predict_proba(e: TreeEnsemble, x: np.ndarray, use_numba: bool | None = None) -> np.ndarray:
    """Mean over trees of the leaf class-frequency distribution."""
    mat, single = _probe_matrix(e, x)
    acc = np.zeros((mat.shape[0], e.n_classes), dtype=np.float64)
    for tree, proba in zip(e.trees, e._leaf_proba):
        leaves = leaf_ids(tree.feature, tree.threshold, tree.left, tree.right, mat, use_numba=use_numba)
        acc += proba[leaves]
    acc /= len(e.trees)
    return acc[0] if single else acc


def predict(e: TreeEnsemble, x: np.ndarray, use_numba: bool | None = None):
    """Argmax of predict_proba; ties break to the lowest label index."""
    proba = predict_proba(e, x, use_numba=use_numba)
    if proba.ndim == 1:
        return e.label_order[int(np.argmax(proba))]
    return [e.label_order[int(i)] for i in np.argmax(proba, axis=1)]


# ---------------------------------------------------------------------------
# Array (de)serialisation for the model bundle: per-tree node arrays are
# concatenated with an offsets table (layout version "1").
# ---------------------------------------------------------------------------


def ensemble_to_arrays(e: TreeEnsemble) -> dict[str, np.ndarray]:
    offsets = np.zeros(len(e.trees) + 1, dtype=np.int64)
    for i, tree in enumerate(e.trees):
        offsets[i + 1] = offsets[i] + tree.n_nodes
    return {
        "offsets": offsets,
        "feature": np.concatenate([t.feature for t in e.trees]),
        "threshold": np.concatenate([t.threshold for t in e.trees]),
        "left": np.concatenate([t.left for t in e.trees]),
        "right": np.concatenate([t.right for t in e.trees]),
        "counts": np.concatenate([t.counts for t in e.trees], axis=0),
    }


def ensemble_from_arrays(
    arrays: dict[str, np.ndarray],
    label_order: tuple,
    params: EnsembleParams,
    dim: int,
) -> TreeEnsemble:
    offsets = arrays["offsets"]
    trees = []
    for i in range(offsets.shape[0] - 1):
        lo, hi = int(offsets[i]), int(offsets[i + 1])
        trees.append(
            Tree(
                feature=arrays["feature"][lo:hi],
                threshold=arrays["threshold"][lo:hi],
                left=arrays["left"][lo:hi],
                right=arrays["right"][lo:hi],
                counts=arrays["counts"][lo:hi],
            )
        )
    return TreeEnsemble(
        trees=trees, n_classes=len(label_order), label_order=label_order, params=params, dim=dim
    )
