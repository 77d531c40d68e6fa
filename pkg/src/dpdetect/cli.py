"""Command line interface.

Subcommands mirror the pipeline stages so each can be rerun from the
previous stage's on-disk artifact: ingest, sslr, embed, train, eval,
predict, report, plus bench for the kernel backend comparison.

Exit codes: 0 success, 1 usage error, 2 stage failure.
"""
from __future__ import annotations

import argparse
import json
import logging
import sys
from pathlib import Path

from . import classifier as clf
from .bundle import save_bundle
from .callgraph import to_dot
from .corpus import CorpusManifest, FilterRules, ingest_corpus, load_labels
from .embedding import EmbedHyperparams, embed_file, load_embedding, save_embedding, train_cbow
from .errors import DpDetectError
from .javaparser import dump_model_json
from .pipeline import (
    EMBED_CORPUS,
    EMBED_TRAIN_FOLD,
    SMOTE_OFF,
    SMOTE_TEST,
    SMOTE_TRAIN,
    PipelineConfig,
    StageFailure,
    analyse_corpus,
    fit_numeric_scaler,
    load_config_file,
    numeric_feature_matrix,
    apply_numeric_scaler,
    predict_files,
    run_pipeline,
)
from .sslr import read_sslr_file, write_sslr_file

logger = logging.getLogger(__name__)

USAGE_ERROR = 1
STAGE_ERROR = 2


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        print(f"error: {message}", file=sys.stderr)
        raise SystemExit(USAGE_ERROR)


def _read_manifest(corpus: str, manifest_path: str | None, project_id: str | None) -> CorpusManifest:
    scanned = ingest_corpus(corpus, FilterRules(), project_id=project_id)
    if manifest_path is None:
        return scanned
    rows = json.loads(Path(manifest_path).read_text(encoding="utf-8"))
    wanted = {(row["project_id"], row["path"]) for row in rows}
    files = tuple(f for f in scanned.files if (f.project_id, f.relative_path) in wanted)
    return CorpusManifest(files=files, excluded=scanned.excluded)


def _add_common_eval_flags(p: argparse.ArgumentParser):
    p.add_argument("--k", type=int, default=None, help="fold count (default 10)")
    p.add_argument("--seed", type=int, default=None, help="global seed (default 0)")
    p.add_argument(
        "--paper-smote-on-test", action="store_true",
        help="replicate the published protocol: oversample the test fold "
        "(inflates reported metrics; default oversamples the training fold)",
    )
    p.add_argument("--no-smote", action="store_true", help="disable oversampling entirely")
    p.add_argument(
        "--rf-baseline", action="store_true",
        help="random-forest mode (bootstrap + exhaustive splits) instead of extra trees",
    )
    p.add_argument(
        "--append-numeric-features", action="store_true",
        help="append the 7 scaled per-file numeric aggregates to each vector",
    )
    p.add_argument(
        "--embed-train-fold-only", action="store_true",
        help="retrain embeddings per fold on training files only "
        "(default trains once on the whole corpus)",
    )
    p.add_argument("--dim", type=int, default=None, help="embedding dimension (default 100)")
    p.add_argument("--epochs", type=int, default=None, help="CBOW epochs (default 15)")
    p.add_argument("--window", type=int, default=None)
    p.add_argument("--min-count", type=int, default=None)
    p.add_argument("--negative", type=int, default=None)
    p.add_argument("--lr", type=float, default=None)
    p.add_argument("--n-trees", type=int, default=None)
    p.add_argument("--max-depth", type=int, default=None)
    p.add_argument("--ngram", type=int, default=None, help="1 = unigrams (default), 2 adds joined bigrams")
    p.add_argument("--project-id", default=None, help="treat the whole tree as one project")
    p.add_argument("--config", default=None, help="INI config file; flags win over file values")


def _build_pipeline_config(args) -> PipelineConfig:
    values: dict = {}
    if args.config:
        values = load_config_file(args.config)

    def pick(flag_value, key: str, cast, default):
        if flag_value is not None:
            return flag_value
        if key in values:
            return cast(values[key])
        return default

    embed = EmbedHyperparams(
        dim=pick(args.dim, "embedding.dim", int, 100),
        window=pick(args.window, "embedding.window", int, 5),
        min_count=pick(args.min_count, "embedding.min_count", int, 2),
        negative_samples=pick(args.negative, "embedding.negative_samples", int, 5),
        epochs=pick(args.epochs, "embedding.epochs", int, 15),
        initial_learning_rate=pick(args.lr, "embedding.initial_learning_rate", float, 0.025),
    )
    mode = "random_forest" if args.rf_baseline else values.get("classifier.mode", "extra")
    ensemble = clf.EnsembleParams(
        n_trees=pick(args.n_trees, "classifier.n_trees", int, 100),
        max_depth=pick(args.max_depth, "classifier.max_depth", int, None),
        mode=mode,
    )
    if args.no_smote:
        smote = SMOTE_OFF
    elif args.paper_smote_on_test:
        smote = SMOTE_TEST
    else:
        smote = values.get("evaluation.smote", SMOTE_TRAIN)
    if smote == SMOTE_TEST:
        logger.warning("SMOTE on the test fold inflates reported metrics; kept for replication")
    return PipelineConfig(
        corpus_root=args.corpus,
        labels_path=args.labels,
        output_dir=args.out,
        project_id=pick(args.project_id, "corpus.project_id", str, None),
        embed=embed,
        ensemble=ensemble,
        k=pick(args.k, "evaluation.k", int, 10),
        smote=smote,
        smote_k_neighbors=int(values.get("evaluation.smote_k_neighbors", 5)),
        embed_scope=EMBED_TRAIN_FOLD if args.embed_train_fold_only else EMBED_CORPUS,
        append_numeric_features=args.append_numeric_features,
        ngram=pick(args.ngram, "embedding.ngram", int, 1),
        seed=pick(args.seed, "evaluation.seed", int, 0),
    )


def build_parser() -> _Parser:
    parser = _Parser(prog="dpdetect", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("ingest", help="scan a corpus tree and write manifest.json")
    p.add_argument("--corpus", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--project-id", default=None)

    p = sub.add_parser("sslr", help="parse, build the call graph and write corpus.sslr")
    p.add_argument("--corpus", required=True)
    p.add_argument("--manifest", default=None, help="restrict to a manifest.json")
    p.add_argument("--out", required=True)
    p.add_argument("--project-id", default=None)
    p.add_argument("--ngram", type=int, default=1)
    p.add_argument("--dump-model", action="store_true", help="also write classmodels.json")
    p.add_argument("--dot", action="store_true", help="also write callgraph.dot")
    p.add_argument("--features-csv", action="store_true", help="also write feature CSVs")

    p = sub.add_parser("embed", help="train CBOW embeddings from an SSLR file")
    p.add_argument("--sslr", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--dim", type=int, default=100)
    p.add_argument("--window", type=int, default=5)
    p.add_argument("--min-count", type=int, default=2)
    p.add_argument("--negative", type=int, default=5)
    p.add_argument("--epochs", type=int, default=15)
    p.add_argument("--lr", type=float, default=0.025)
    p.add_argument("--seed", type=int, default=0)

    p = sub.add_parser("train", help="train a model bundle from stage artifacts")
    p.add_argument("--corpus", required=True)
    p.add_argument("--labels", required=True)
    p.add_argument("--sslr", required=True)
    p.add_argument("--embedding", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--manifest", default=None)
    p.add_argument("--project-id", default=None)
    p.add_argument("--n-trees", type=int, default=100)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--rf-baseline", action="store_true")
    p.add_argument("--append-numeric-features", action="store_true")

    p = sub.add_parser("eval", help="run the full pipeline with K-fold evaluation")
    p.add_argument("--corpus", required=True)
    p.add_argument("--labels", required=True)
    p.add_argument("--out", required=True)
    _add_common_eval_flags(p)

    p = sub.add_parser("predict", help="classify Java files with a trained bundle")
    p.add_argument("--bundle", required=True)
    p.add_argument("files", nargs="*")
    p.add_argument("--json", action="store_true", help="JSON output instead of a table")

    p = sub.add_parser("report", help="pretty-print a report.json")
    p.add_argument("--report", required=True)

    p = sub.add_parser("bench", help="compare the numba and numpy kernel backends")
    p.add_argument("--size", choices=["small", "medium"], default="small")
    p.add_argument("--repeats", type=int, default=3)

    return parser


def _cmd_ingest(args) -> int:
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    manifest = ingest_corpus(args.corpus, FilterRules(), project_id=args.project_id)
    (out / "manifest.json").write_text(manifest.to_json(), encoding="utf-8")
    (out / "excluded.json").write_text(
        json.dumps([{"path": p, "reason": r} for p, r in manifest.excluded], indent=2) + "\n",
        encoding="utf-8",
    )
    print(f"{len(manifest.files)} files retained, {len(manifest.excluded)} excluded")
    return 0


def _cmd_sslr(args) -> int:
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    manifest = _read_manifest(args.corpus, args.manifest, args.project_id)
    artifacts = analyse_corpus(manifest, ngram=args.ngram)
    write_sslr_file(artifacts.documents, out / "corpus.sslr")
    if artifacts.model.diagnostics:
        for path, message in artifacts.model.diagnostics:
            print(f"diagnostic: {path}: {message}", file=sys.stderr)
    if args.dump_model:
        (out / "classmodels.json").write_text(dump_model_json(artifacts.model), encoding="utf-8")
    if args.dot:
        (out / "callgraph.dot").write_text(to_dot(artifacts.graph), encoding="utf-8")
    if args.features_csv:
        import csv as _csv

        from .features import (
            CLASS_CSV_HEADER,
            METHOD_CSV_HEADER,
            class_csv_row,
            method_csv_row,
        )

        with (out / "features_classes.csv").open("w", newline="", encoding="utf-8") as fh:
            writer = _csv.writer(fh)
            writer.writerow(CLASS_CSV_HEADER)
            for ff in artifacts.features_by_file.values():
                for entry in ff.entries:
                    writer.writerow(class_csv_row(ff, entry))
        with (out / "features_methods.csv").open("w", newline="", encoding="utf-8") as fh:
            writer = _csv.writer(fh)
            writer.writerow(METHOD_CSV_HEADER)
            for ff in artifacts.features_by_file.values():
                for entry in ff.entries:
                    for _, record in entry.methods:
                        writer.writerow(method_csv_row(ff, entry, record))
    print(f"wrote SSLR for {len(artifacts.documents)} files")
    return 0


def _cmd_embed(args) -> int:
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    documents = read_sslr_file(args.sslr)
    params = EmbedHyperparams(
        dim=args.dim, window=args.window, min_count=args.min_count,
        negative_samples=args.negative, epochs=args.epochs,
        initial_learning_rate=args.lr, seed=args.seed,
    )
    model = train_cbow(documents, params)
    save_embedding(model, out / "embedding.txt")
    first = model.epoch_losses[0] if model.epoch_losses else float("nan")
    last = model.epoch_losses[-1] if model.epoch_losses else float("nan")
    print(f"vocab {len(model.vocabulary)}, dim {model.dim}, loss {first:.4f} -> {last:.4f}")
    return 0


def _cmd_train(args) -> int:
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    manifest = _read_manifest(args.corpus, args.manifest, args.project_id)
    instances = load_labels(args.labels, manifest)
    artifacts = analyse_corpus(manifest)
    embedding = load_embedding(args.embedding)
    documents = {doc.source: doc for doc in read_sslr_file(args.sslr)}

    usable = [i for i in instances if i.source.full_path in documents]
    vectors = {key: embed_file(doc, embedding) for key, doc in documents.items()}
    import numpy as np

    scaler = None
    rows = []
    labels = []
    file_keys = list(documents)
    file_row = {key: i for i, key in enumerate(file_keys)}
    numeric = None
    if args.append_numeric_features:
        raw = numeric_feature_matrix(artifacts, file_keys)
        scaler = fit_numeric_scaler(raw)
        numeric = apply_numeric_scaler(raw, scaler)
    for inst in usable:
        vec = vectors[inst.source.full_path].values
        if numeric is not None:
            vec = np.concatenate([vec, numeric[file_row[inst.source.full_path]]])
        rows.append(vec)
        labels.append(inst.label)
    params = clf.EnsembleParams(
        n_trees=args.n_trees,
        mode="random_forest" if args.rf_baseline else "extra",
        seed=args.seed,
    )
    ensemble = clf.fit(np.asarray(rows), labels, params, label_order=tuple(sorted(set(labels))))
    save_bundle(out / "model.bundle", embedding, ensemble, numeric_scaler=scaler)
    print(f"trained on {len(rows)} instances; bundle at {out / 'model.bundle'}")
    return 0


def _cmd_eval(args) -> int:
    config = _build_pipeline_config(args)
    report = run_pipeline(config)
    m = report.metrics
    print(
        f"weighted P {m.weighted_precision:.2f}%  R {m.weighted_recall:.2f}%  "
        f"F1 {m.weighted_f1:.2f}%  M {m.misclassification:.4f}"
    )
    print(f"artifacts in {config.output_dir}")
    return 0


def _cmd_predict(args) -> int:
    if not args.files:
        print("no input files", file=sys.stderr)
        return 0
    results, diagnostics = predict_files(args.bundle, args.files)
    for path, message in diagnostics:
        print(f"diagnostic: {path}: {message}", file=sys.stderr)
    if args.json:
        payload = [
            {
                "path": r.path,
                "class_name": r.class_name,
                "label": getattr(r.label, "value", str(r.label)),
                "confidence": round(r.confidence, 4),
            }
            for r in results
        ]
        print(json.dumps(payload, indent=2))
    else:
        for r in results:
            label = getattr(r.label, "value", str(r.label))
            print(f"{r.path}\t{r.class_name}\t{label}\t{r.confidence:.4f}")
    return 0


def _cmd_report(args) -> int:
    payload = json.loads(Path(args.report).read_text(encoding="utf-8"))
    weighted = payload["weighted"]
    print(f"k={payload['k']} seed={payload['seed']}")
    print(f"{'label':<12} {'P%':>8} {'R%':>8} {'F1%':>8} {'support':>8}")
    for label, row in sorted(payload["per_class"].items()):
        print(
            f"{label:<12} {row['precision']:>8.2f} {row['recall']:>8.2f} "
            f"{row['f1']:>8.2f} {row['support']:>8}"
        )
    print(
        f"{'weighted':<12} {weighted['precision']:>8.2f} {weighted['recall']:>8.2f} "
        f"{weighted['f1']:>8.2f}"
    )
    print(f"misclassification {payload['misclassification']:.4f}")
    return 0


def _cmd_bench(args) -> int:
    from .bench import run_benchmark

    run_benchmark(size=args.size, repeats=args.repeats)
    return 0


_COMMANDS = {
    "ingest": _cmd_ingest,
    "sslr": _cmd_sslr,
    "embed": _cmd_embed,
    "train": _cmd_train,
    "eval": _cmd_eval,
    "predict": _cmd_predict,
    "report": _cmd_report,
    "bench": _cmd_bench,
}


def main(argv: list[str] | None = None) -> int:
    logging.basicConfig(level=logging.WARNING, format="%(levelname)s %(name)s: %(message)s")
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        return _COMMANDS[args.command](args)
    except StageFailure as exc:
        print(f"error: {exc}", file=sys.stderr)
        return STAGE_ERROR
    except DpDetectError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return STAGE_ERROR
    except FileNotFoundError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return STAGE_ERROR


if __name__ == "__main__":
    sys.exit(main())
