"""Benchmark the numba kernels against the pure-numpy fallbacks.

Times one CBOW training run and one ensemble fit+predict on a synthetic
workload with both backends and prints the speedup.  Run via
``dpdetect bench`` or ``python -m dpdetect.bench``.
"""
from __future__ import annotations

import time

import numpy as np

from . import accel
from . import classifier as clf
from .corpus import PatternLabel, generate_synthetic_corpus
from .embedding import EmbedHyperparams, train_cbow
from .pipeline import analyse_corpus

_SIZES = {
    # files per pattern, CBOW epochs, classifier points, trees
    "small": (8, 5, 400, 50),
    "medium": (25, 15, 2000, 100),
}


def _prepare_documents(files_per_pattern: int):
    spec = {label: files_per_pattern for label in PatternLabel}
    manifest, _ = generate_synthetic_corpus(spec, seed=7)
    return analyse_corpus(manifest).documents


def _time(fn, repeats: int) -> float:
    best = float("inf")
    for _ in range(repeats):
        t0 = time.perf_counter()
        fn()
        best = min(best, time.perf_counter() - t0)
    return best


def run_benchmark(size: str = "small", repeats: int = 3) -> dict[str, dict[str, float]]:
    files_per_pattern, epochs, n_points, n_trees = _SIZES[size]
    results: dict[str, dict[str, float]] = {}

    documents = _prepare_documents(files_per_pattern)
    embed_params = EmbedHyperparams(epochs=epochs, seed=3)

    rng = np.random.Generator(np.random.PCG64(11))
    X = rng.random((n_points, 100))
    y = list(rng.integers(0, 13, size=n_points))
    tree_params = clf.EnsembleParams(n_trees=n_trees, seed=5)

    backends: list[tuple[str, bool]] = [("numpy", False)]
    if accel.numba_available():
        # warm the JIT outside the timed region
        train_cbow(documents[:4], EmbedHyperparams(epochs=1, min_count=1, seed=0), use_numba=True)
        warm = clf.fit(X[:20], y[:20], clf.EnsembleParams(n_trees=2, seed=1), use_numba=True)
        clf.predict_proba(warm, X[:20], use_numba=True)
        backends.append(("numba", True))
    else:
        print("numba unavailable; timing the numpy backend only")

    for name, flag in backends:
        cbow_t = _time(lambda: train_cbow(documents, embed_params, use_numba=flag), repeats)
        fit_t = _time(lambda: clf.fit(X, y, tree_params, use_numba=flag), repeats)
        ensemble = clf.fit(X, y, tree_params, use_numba=flag)
        pred_t = _time(lambda: clf.predict_proba(ensemble, X, use_numba=flag), repeats)
        results[name] = {"cbow": cbow_t, "tree_fit": fit_t, "tree_predict": pred_t}

    header = f"{'kernel':<14}" + "".join(f"{name:>12}" for name in results)
    if len(results) == 2:
        header += f"{'speedup':>10}"
    print(header)
    for kernel in ("cbow", "tree_fit", "tree_predict"):
        row = f"{kernel:<14}" + "".join(f"{results[name][kernel]:>11.3f}s" for name in results)
        if len(results) == 2:
            row += f"{results['numpy'][kernel] / results['numba'][kernel]:>9.1f}x"
        print(row)
    return results


if __name__ == "__main__":
    run_benchmark()
