"""End-to-end orchestration: ingest through cross-validated evaluation.

Stage order is fixed: ingest -> parse -> call graph -> features -> SSLR
-> CBOW -> file vectors -> stratified K-fold fit/predict (SMOTE per
config) -> report.  Every stage's artifact lands in the output
directory; a MANIFEST file records which stages completed so partial
runs are recognisable.  All stage seeds derive deterministically from
the global seed.
"""
from __future__ import annotations

import configparser
import hashlib
import logging
from dataclasses import dataclass, field, replace
from pathlib import Path

import numpy as np

from . import classifier as clf
from .bundle import load_bundle, save_bundle
from .callgraph import CallGraph, build_call_graph
from .corpus import (
    CorpusManifest,
    FilterRules,
    LabelledInstance,
    ingest_corpus,
    load_labels,
)
from .embedding import (
    EmbedHyperparams,
    EmbeddingModel,
    FileVector,
    embed_file,
    save_embedding,
    train_cbow,
)
from .errors import DpDetectError, JavaSyntaxError
from .evaluation import (
    EvalReport,
    classification_metrics,
    confusion_matrix,
    confusion_to_csv,
    smote_oversample,
    stratified_kfold,
)
from .features import FileFeatures, extract_file_features
from .javaparser import CodeModel, parse_corpus, parse_file
from .sslr import SslrDocument, emit_sslr, write_sslr_file

logger = logging.getLogger(__name__)

SMOTE_OFF = "off"
SMOTE_TRAIN = "train"
SMOTE_TEST = "test"  # paper replication: oversample the test fold

EMBED_CORPUS = "corpus"
EMBED_TRAIN_FOLD = "train-fold"

# file-level aggregates appended by append_numeric_features:
# implements/extends bits (class mean) + locals, calls, lines,
# other-class callees, callers (method means)
NUMERIC_FEATURE_COUNT = 7


@dataclass(frozen=True)
class PipelineConfig:
    corpus_root: str
    labels_path: str
    output_dir: str
    filters: FilterRules = field(default_factory=FilterRules)
    project_id: str | None = None
    embed: EmbedHyperparams = field(default_factory=EmbedHyperparams)
    ensemble: EnsembleParams = field(default_factory=lambda: clf.EnsembleParams())
    k: int = 10
    smote: str = SMOTE_TRAIN
    smote_k_neighbors: int = 5
    embed_scope: str = EMBED_CORPUS
    append_numeric_features: bool = False
    ngram: int = 1
    seed: int = 0

    def __post_init__(self):
        if self.smote not in (SMOTE_OFF, SMOTE_TRAIN, SMOTE_TEST):
            raise ValueError(f"unknown smote setting {self.smote!r}")
        if self.embed_scope not in (EMBED_CORPUS, EMBED_TRAIN_FOLD):
            raise ValueError(f"unknown embed_scope {self.embed_scope!r}")


# re-export for config assembly convenience
EnsembleParams = clf.EnsembleParams


class StageFailure(DpDetectError):
    def __init__(self, stage: str, cause: Exception):
        super().__init__(f"stage {stage!r} failed: {cause}")
        self.stage = stage
        self.cause = cause


def derive_seed(base: int, *parts) -> int:
    digest = hashlib.sha256("|".join([str(base), *map(str, parts)]).encode()).digest()
    return int.from_bytes(digest[:8], "big") >> 1


def _write_run_manifest(out: Path, stages: list[tuple[str, str]]) -> None:
    lines = [f"{status} {name}" for name, status in stages]
    (out / "MANIFEST").write_text("\n".join(lines) + "\n", encoding="utf-8")


@dataclass
class CorpusArtifacts:
    """Everything derived from the corpus up to per-file vectors."""

    manifest: CorpusManifest
    model: CodeModel
    graph: CallGraph
    features_by_file: dict[str, FileFeatures]
    documents: list[SslrDocument]
    doc_by_file: dict[str, SslrDocument]


def analyse_corpus(manifest: CorpusManifest, ngram: int = 1) -> CorpusArtifacts:
    """Parse, build the call graph and emit SSLR documents in manifest order."""
    model = parse_corpus(manifest)
    graph = build_call_graph(model)
    features_by_file: dict[str, FileFeatures] = {}
    documents: list[SslrDocument] = []
    doc_by_file: dict[str, SslrDocument] = {}
    for source in manifest.files:
        models = model.classes_by_file.get(source.full_path)
        if models is None:
            continue  # parse diagnostic
        ff = extract_file_features(source, models, graph)
        features_by_file[source.full_path] = ff
        doc = emit_sslr(ff, ngram=ngram)
        documents.append(doc)
        doc_by_file[source.full_path] = doc
    return CorpusArtifacts(
        manifest=manifest,
        model=model,
        graph=graph,
        features_by_file=features_by_file,
        documents=documents,
        doc_by_file=doc_by_file,
    )


def numeric_feature_matrix(artifacts: CorpusArtifacts, file_keys: list[str]) -> np.ndarray:
    """Per-file numeric aggregates used by append_numeric_features."""
    rows = np.zeros((len(file_keys), NUMERIC_FEATURE_COUNT), dtype=np.float64)
    for row, key in enumerate(file_keys):
        ff = artifacts.features_by_file.get(key)
        if ff is None or not ff.entries:
            continue
        class_recs = [e.record for e in ff.entries]
        method_recs = [mr for e in ff.entries for _, mr in e.methods]
        rows[row, 0] = float(np.mean([r.class_implements for r in class_recs]))
        rows[row, 1] = float(np.mean([r.class_extends for r in class_recs]))
        if method_recs:
            rows[row, 2] = float(np.mean([r.num_variables for r in method_recs]))
            rows[row, 3] = float(np.mean([r.num_method_calls for r in method_recs]))
            rows[row, 4] = float(np.mean([r.num_lines for r in method_recs]))
            rows[row, 5] = float(np.mean([r.incoming_method_count for r in method_recs]))
            rows[row, 6] = float(np.mean([r.outgoing_method_count for r in method_recs]))
    return rows


def fit_numeric_scaler(matrix: np.ndarray) -> dict:
    return {
        "min": matrix.min(axis=0).tolist() if matrix.shape[0] else [0.0] * NUMERIC_FEATURE_COUNT,
        "max": matrix.max(axis=0).tolist() if matrix.shape[0] else [0.0] * NUMERIC_FEATURE_COUNT,
    }


def apply_numeric_scaler(matrix: np.ndarray, scaler: dict) -> np.ndarray:
    lo = np.asarray(scaler["min"], dtype=np.float64)
    hi = np.asarray(scaler["max"], dtype=np.float64)
    span = hi - lo
    span[span == 0.0] = 1.0
    return (matrix - lo) / span


def _instance_matrix(
    instances: list[LabelledInstance],
    vectors: dict[str, FileVector],
    numeric: np.ndarray | None,
    file_row: dict[str, int] | None,
) -> tuple[np.ndarray, list]:
    rows = []
    labels = []
    for inst in instances:
        fv = vectors[inst.source.full_path]
        if numeric is not None:
            rows.append(np.concatenate([fv.values, numeric[file_row[inst.source.full_path]]]))
        else:
            rows.append(fv.values)
        labels.append(inst.label)
    return np.asarray(rows, dtype=np.float64), labels


def run_pipeline(config: PipelineConfig, use_numba: bool | None = None) -> EvalReport:
    """Execute the full pipeline and write all artifacts to the output dir."""
    out = Path(config.output_dir)
    out.mkdir(parents=True, exist_ok=True)
    stages: list[tuple[str, str]] = []

    def stage(name: str):
        def runner(fn):
            try:
                result = fn()
            except Exception as exc:
                stages.append((name, "failed"))
                _write_run_manifest(out, stages)
                raise StageFailure(name, exc) from exc
            stages.append((name, "ok"))
            return result

        return runner

    manifest = stage("ingest")(
        lambda: ingest_corpus(config.corpus_root, config.filters, project_id=config.project_id)
    )
    (out / "manifest.json").write_text(manifest.to_json(), encoding="utf-8")

    instances = stage("labels")(lambda: load_labels(config.labels_path, manifest))

    model = stage("parse")(lambda: parse_corpus(manifest))
    graph = stage("callgraph")(lambda: build_call_graph(model))

    def build_documents() -> CorpusArtifacts:
        features_by_file: dict[str, FileFeatures] = {}
        documents: list[SslrDocument] = []
        doc_by_file: dict[str, SslrDocument] = {}
        for source in manifest.files:
            models = model.classes_by_file.get(source.full_path)
            if models is None:
                continue
            ff = extract_file_features(source, models, graph)
            features_by_file[source.full_path] = ff
            doc = emit_sslr(ff, ngram=config.ngram)
            documents.append(doc)
            doc_by_file[source.full_path] = doc
        return CorpusArtifacts(
            manifest=manifest, model=model, graph=graph,
            features_by_file=features_by_file, documents=documents, doc_by_file=doc_by_file,
        )

    artifacts = stage("sslr")(build_documents)
    write_sslr_file(artifacts.documents, out / "corpus.sslr")

    parsed = set(artifacts.doc_by_file)
    usable = [inst for inst in instances if inst.source.full_path in parsed]
    dropped = len(instances) - len(usable)
    if dropped:
        logger.warning("%d labelled instance(s) reference unparseable files; dropped", dropped)
    if not usable:
        stages.append(("instances", "failed"))
        _write_run_manifest(out, stages)
        raise StageFailure("instances", ValueError("no labelled instance references a parsed file"))
    instances = usable

    label_order = tuple(sorted({inst.label for inst in instances}))
    folds = stage("folds")(
        lambda: stratified_kfold([inst.label for inst in instances], config.k, derive_seed(config.seed, "folds"))
    )

    file_keys = [f.full_path for f in manifest.files if f.full_path in parsed]
    file_row = {key: i for i, key in enumerate(file_keys)}
    numeric_all = None
    scaler = None
    if config.append_numeric_features:
        raw_numeric = numeric_feature_matrix(artifacts, file_keys)
        scaler = fit_numeric_scaler(raw_numeric)
        numeric_all = apply_numeric_scaler(raw_numeric, scaler)

    embed_params = replace(config.embed, seed=derive_seed(config.seed, "embedding"))

    corpus_embedding: EmbeddingModel | None = None
    vectors_all: dict[str, FileVector] | None = None
    if config.embed_scope == EMBED_CORPUS:
        corpus_embedding = stage("embed")(
            lambda: train_cbow(artifacts.documents, embed_params, use_numba=use_numba)
        )
        save_embedding(corpus_embedding, out / "embedding.txt")
        vectors_all = {
            key: embed_file(artifacts.doc_by_file[key], corpus_embedding) for key in file_keys
        }

    def run_cv() -> tuple:
        truth_all: list = []
        pred_all: list = []
        per_fold: list[dict] = []
        for fold in range(config.k):
            train_idx = folds.train_indices(fold)
            test_idx = folds.test_indices(fold)
            train_instances = [instances[i] for i in train_idx]
            test_instances = [instances[i] for i in test_idx]

            if config.embed_scope == EMBED_TRAIN_FOLD:
                train_files = {inst.source.full_path for inst in train_instances}
                fold_docs = [artifacts.doc_by_file[k] for k in file_keys if k in train_files]
                fold_embed = train_cbow(
                    fold_docs,
                    replace(embed_params, seed=derive_seed(config.seed, "embedding", fold)),
                    use_numba=use_numba,
                )
                vectors = {key: embed_file(artifacts.doc_by_file[key], fold_embed) for key in file_keys}
            else:
                vectors = vectors_all

            X_train, y_train = _instance_matrix(train_instances, vectors, numeric_all, file_row)
            X_test, y_test = _instance_matrix(test_instances, vectors, numeric_all, file_row)

            if config.smote == SMOTE_TRAIN:
                X_train, y_train = smote_oversample(
                    X_train, y_train, config.smote_k_neighbors,
                    derive_seed(config.seed, "smote", fold),
                )
            elif config.smote == SMOTE_TEST:
                # replicates the published protocol; synthetic test points
                # inflate the reported metrics
                X_test, y_test = smote_oversample(
                    X_test, y_test, config.smote_k_neighbors,
                    derive_seed(config.seed, "smote", fold),
                )

            params = replace(config.ensemble, seed=derive_seed(config.seed, "ensemble", fold))
            ensemble = clf.fit(X_train, y_train, params, label_order=label_order, use_numba=use_numba)
            predictions = clf.predict(ensemble, X_test, use_numba=use_numba)

            truth_all.extend(y_test)
            pred_all.extend(predictions)
            fold_metrics = classification_metrics(confusion_matrix(y_test, predictions, label_order))
            per_fold.append(
                {
                    "fold": fold,
                    "precision": round(fold_metrics.weighted_precision, 2),
                    "recall": round(fold_metrics.weighted_recall, 2),
                    "f1": round(fold_metrics.weighted_f1, 2),
                    "misclassification": round(fold_metrics.misclassification, 6),
                }
            )
        return truth_all, pred_all, per_fold

    truth_all, pred_all, per_fold = stage("cross-validation")(run_cv)

    def finalize() -> EvalReport:
        pooled = confusion_matrix(truth_all, pred_all, label_order)
        metrics = classification_metrics(pooled)
        report = EvalReport(
            metrics=metrics,
            k=config.k,
            seed=config.seed,
            per_fold=per_fold,
            config_echo={
                "smote": config.smote,
                "embed_scope": config.embed_scope,
                "append_numeric_features": config.append_numeric_features,
                "mode": config.ensemble.mode,
                "n_trees": config.ensemble.n_trees,
                "dim": config.embed.dim,
                "ngram": config.ngram,
                "dropped_instances": dropped,
            },
        )
        (out / "report.json").write_text(report.to_json(), encoding="utf-8")
        confusion_to_csv(pooled, out / "confusion.csv")
        return report

    report = stage("report")(finalize)

    def train_bundle():
        embedding = corpus_embedding
        if embedding is None:
            embedding = train_cbow(artifacts.documents, embed_params, use_numba=use_numba)
            save_embedding(embedding, out / "embedding.txt")
            vectors = {key: embed_file(artifacts.doc_by_file[key], embedding) for key in file_keys}
        else:
            vectors = vectors_all
        X_all, y_all = _instance_matrix(instances, vectors, numeric_all, file_row)
        if config.smote == SMOTE_TRAIN:
            X_all, y_all = smote_oversample(
                X_all, y_all, config.smote_k_neighbors, derive_seed(config.seed, "smote", "final")
            )
        params = replace(config.ensemble, seed=derive_seed(config.seed, "ensemble", "final"))
        final = clf.fit(X_all, y_all, params, label_order=label_order, use_numba=use_numba)
        save_bundle(out / "model.bundle", embedding, final, numeric_scaler=scaler)

    stage("bundle")(train_bundle)
    _write_run_manifest(out, stages)
    return report


@dataclass(frozen=True)
class Prediction:
    path: str
    class_name: str
    label: object
    confidence: float


def predict_files(
    bundle_path: str | Path,
    files: list[str | Path],
    use_numba: bool | None = None,
) -> tuple[list[Prediction], list[tuple[str, str]]]:
    """Classify standalone Java files with a trained bundle.

    The call graph is built over the given batch only.  Unparseable
    files become diagnostics instead of predictions.
    """
    embedding, ensemble, scaler = load_bundle(bundle_path)

    from .corpus import SourceFile

    pairs: list[tuple[str, SourceFile]] = []  # (raw path, unique source)
    diagnostics: list[tuple[str, str]] = []
    for i, raw in enumerate(files):
        path = Path(raw)
        try:
            content = path.read_text(encoding="utf-8", errors="replace")
        except OSError as exc:
            diagnostics.append((str(path), f"unreadable: {exc}"))
            continue
        source = SourceFile(
            project_id="predict", relative_path=f"{i}/{path.name}", content=content
        )
        pairs.append((str(raw), source))

    parsed: dict[str, list] = {}
    for raw, source in pairs:
        try:
            parsed[source.full_path] = parse_file(source)
        except JavaSyntaxError as exc:
            diagnostics.append((raw, str(exc)))

    sub_manifest = CorpusManifest(
        files=tuple(source for _, source in pairs if source.full_path in parsed)
    )
    artifacts = analyse_corpus(sub_manifest)

    results: list[Prediction] = []
    file_keys = [f.full_path for f in sub_manifest.files]
    numeric = None
    file_row = None
    if scaler is not None:
        numeric = apply_numeric_scaler(numeric_feature_matrix(artifacts, file_keys), scaler)
        file_row = {key: i for i, key in enumerate(file_keys)}
    for raw, source in pairs:
        doc = artifacts.doc_by_file.get(source.full_path)
        if doc is None:
            continue
        fv = embed_file(doc, embedding)
        vec = fv.values
        if numeric is not None:
            vec = np.concatenate([vec, numeric[file_row[source.full_path]]])
        proba = clf.predict_proba(ensemble, vec, use_numba=use_numba)
        best = int(np.argmax(proba))
        models = parsed[source.full_path]
        class_name = models[0].name if models else "?"
        results.append(
            Prediction(
                path=raw,
                class_name=class_name,
                label=ensemble.label_order[best],
                confidence=float(proba[best]),
            )
        )
    return results, diagnostics


# ---------------------------------------------------------------------------
# Config file loading: INI sections with flag overrides applied by the CLI
# ---------------------------------------------------------------------------


def load_config_file(path: str | Path) -> dict:
    """Read the key=value config; returns a flat dict of raw strings."""
    parser = configparser.ConfigParser()
    read = parser.read(path)
    if not read:
        raise FileNotFoundError(f"config file not found: {path}")
    flat: dict[str, str] = {}
    for section in parser.sections():
        for key, value in parser.items(section):
            flat[f"{section}.{key}"] = value
    return flat
