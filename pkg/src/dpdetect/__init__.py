"""Design-pattern detection for Java source code.

Pipeline: corpus ingestion -> Java-7 subset parsing -> static call
graph -> 15 feature records -> SSLR text rendering -> CBOW embeddings
-> per-file vectors -> randomized-tree ensemble under stratified K-fold
cross-validation.
"""

from .corpus import (
    CorpusManifest,
    FilterRules,
    LabelledInstance,
    PatternLabel,
    SourceFile,
    generate_synthetic_corpus,
    ingest_corpus,
    load_labels,
)
from .callgraph import CallGraph, MethodId, build_call_graph, callees, callers
from .classifier import EnsembleParams, TreeEnsemble, fit, predict, predict_proba
from .embedding import (
    EmbedHyperparams,
    EmbeddingModel,
    FileVector,
    cosine_similarity,
    embed_file,
    train_cbow,
)
from .evaluation import (
    ConfusionMatrix,
    EvalReport,
    FoldAssignment,
    classification_metrics,
    cohen_kappa,
    confusion_matrix,
    smote_oversample,
    stratified_kfold,
)
from .features import (
    ClassFeatureRecord,
    MethodFeatureRecord,
    extract_class_features,
    extract_method_features,
)
from .javaparser import ClassModel, CodeModel, MethodModel, parse_corpus, parse_file
from .pipeline import PipelineConfig, predict_files, run_pipeline
from .sslr import SslrDocument, emit_sslr, split_identifier

__version__ = "0.1.0"

__all__ = [
    "CallGraph",
    "ClassFeatureRecord",
    "ClassModel",
    "CodeModel",
    "ConfusionMatrix",
    "CorpusManifest",
    "EmbedHyperparams",
    "EmbeddingModel",
    "EnsembleParams",
    "EvalReport",
    "FileVector",
    "FilterRules",
    "FoldAssignment",
    "LabelledInstance",
    "MethodFeatureRecord",
    "MethodId",
    "MethodModel",
    "PatternLabel",
    "PipelineConfig",
    "SourceFile",
    "SslrDocument",
    "TreeEnsemble",
    "build_call_graph",
    "callees",
    "callers",
    "classification_metrics",
    "cohen_kappa",
    "confusion_matrix",
    "cosine_similarity",
    "embed_file",
    "emit_sslr",
    "extract_class_features",
    "extract_method_features",
    "fit",
    "generate_synthetic_corpus",
    "ingest_corpus",
    "load_labels",
    "parse_corpus",
    "parse_file",
    "predict",
    "predict_files",
    "predict_proba",
    "run_pipeline",
    "smote_oversample",
    "split_identifier",
    "stratified_kfold",
    "train_cbow",
]
