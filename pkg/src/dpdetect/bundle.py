"""Model bundle: one zip holding everything needed to classify new files.

Members (layout version 1):

* ``meta.json``    - version, label order, ensemble params, vector dim,
                     optional numeric-feature scaler bounds
* ``embedding.txt`` - the token-vector table in the text format
* ``ensemble.npz``  - concatenated tree arrays with per-tree offsets
"""
from __future__ import annotations

import io
import json
import zipfile
from pathlib import Path

import numpy as np

from .classifier import EnsembleParams, TreeEnsemble, ensemble_from_arrays, ensemble_to_arrays
from .corpus import PatternLabel
from .embedding import EmbeddingModel, parse_embedding, render_embedding
from .errors import BundleFormatError

BUNDLE_VERSION = 1


def save_bundle(
    path: str | Path,
    embedding: EmbeddingModel,
    ensemble: TreeEnsemble,
    numeric_scaler: dict | None = None,
) -> None:
    meta = {
        "version": BUNDLE_VERSION,
        "label_order": [getattr(label, "value", label) for label in ensemble.label_order],
        "dim": ensemble.dim,
        "params": {
            "n_trees": ensemble.params.n_trees,
            "max_features": ensemble.params.max_features,
            "min_samples_split": ensemble.params.min_samples_split,
            "max_depth": ensemble.params.max_depth,
            "mode": ensemble.params.mode,
            "seed": ensemble.params.seed,
        },
        "numeric_scaler": numeric_scaler,
    }
    buf = io.BytesIO()
    np.savez(buf, **ensemble_to_arrays(ensemble))
    with zipfile.ZipFile(path, "w", compression=zipfile.ZIP_DEFLATED) as zf:
        zf.writestr("meta.json", json.dumps(meta, indent=2, sort_keys=True))
        zf.writestr("embedding.txt", render_embedding(embedding))
        zf.writestr("ensemble.npz", buf.getvalue())


def load_bundle(path: str | Path) -> tuple[EmbeddingModel, TreeEnsemble, dict | None]:
    try:
        with zipfile.ZipFile(path) as zf:
            names = set(zf.namelist())
            required = {"meta.json", "embedding.txt", "ensemble.npz"}
            if not required <= names:
                raise BundleFormatError(f"bundle missing members: {sorted(required - names)}")
            meta = json.loads(zf.read("meta.json"))
            embedding = parse_embedding(zf.read("embedding.txt").decode("utf-8"))
            with np.load(io.BytesIO(zf.read("ensemble.npz"))) as npz:
                arrays = {key: npz[key] for key in npz.files}
    except (zipfile.BadZipFile, json.JSONDecodeError, KeyError, ValueError) as exc:
        raise BundleFormatError(f"cannot read bundle {path}: {exc}") from exc
    if meta.get("version") != BUNDLE_VERSION:
        raise BundleFormatError(f"unsupported bundle version {meta.get('version')!r}")
    raw_params = meta["params"]
    params = EnsembleParams(
        n_trees=raw_params["n_trees"],
        max_features=raw_params["max_features"],
        min_samples_split=raw_params["min_samples_split"],
        max_depth=raw_params["max_depth"],
        mode=raw_params["mode"],
        seed=raw_params["seed"],
    )
    label_order = tuple(PatternLabel.from_token(token) for token in meta["label_order"])
    ensemble = ensemble_from_arrays(arrays, label_order, params, meta["dim"])
    return embedding, ensemble, meta.get("numeric_scaler")
