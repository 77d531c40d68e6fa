import json

import numpy as np
import pytest

from dpdetect.bundle import load_bundle, save_bundle
from dpdetect.corpus import (
    PatternLabel,
    generate_synthetic_corpus,
    write_corpus,
    write_labels_csv,
)
from dpdetect.errors import BundleFormatError, LabelsNotFound
from dpdetect.pipeline import (
    PipelineConfig,
    StageFailure,
    load_config_file,
    predict_files,
    run_pipeline,
)
from dpdetect import cli


SMALL_SPEC = {
    PatternLabel.SINGLETON: 10,
    PatternLabel.ADAPTER: 10,
    PatternLabel.BUILDER: 10,
}


@pytest.fixture(scope="module")
def small_corpus(tmp_path_factory):
    tmp = tmp_path_factory.mktemp("smallcorpus")
    manifest, instances = generate_synthetic_corpus(SMALL_SPEC, seed=21)
    corpus = tmp / "corpus"
    write_corpus(manifest, corpus)
    labels = tmp / "labels.csv"
    write_labels_csv(instances, labels)
    return corpus, labels


@pytest.fixture(scope="module")
def small_run(small_corpus, tmp_path_factory):
    corpus, labels = small_corpus
    out = tmp_path_factory.mktemp("smallrun")
    config = PipelineConfig(
        corpus_root=str(corpus), labels_path=str(labels), output_dir=str(out),
        k=5, seed=4,
    )
    report = run_pipeline(config)
    return config, report, out


class TestRunPipeline:
    def test_artifacts_written(self, small_run):
        _, _, out = small_run
        for name in ("manifest.json", "corpus.sslr", "embedding.txt",
                     "report.json", "confusion.csv", "model.bundle", "MANIFEST"):
            assert (out / name).exists(), name

    def test_stage_order_in_manifest(self, small_run):
        _, _, out = small_run
        lines = (out / "MANIFEST").read_text().splitlines()
        names = [line.split(" ", 1)[1] for line in lines]
        assert names == ["ingest", "labels", "parse", "callgraph", "sslr",
                         "folds", "embed", "cross-validation", "report", "bundle"]
        assert all(line.startswith("ok ") for line in lines)

    def test_synthetic_corpus_is_learnable(self, small_run):
        _, report, _ = small_run
        assert report.metrics.weighted_f1 >= 85.0

    def test_rerun_byte_identical(self, small_corpus, tmp_path):
        corpus, labels = small_corpus
        blobs = []
        for name in ("r1", "r2"):
            out = tmp_path / name
            run_pipeline(PipelineConfig(
                corpus_root=str(corpus), labels_path=str(labels),
                output_dir=str(out), k=3, seed=10,
            ))
            blobs.append((
                (out / "report.json").read_bytes(),
                (out / "embedding.txt").read_bytes(),
                (out / "corpus.sslr").read_bytes(),
                (out / "confusion.csv").read_bytes(),
            ))
        assert blobs[0] == blobs[1]

    def test_missing_labels_is_fatal_naming_stage(self, small_corpus, tmp_path):
        corpus, _ = small_corpus
        out = tmp_path / "out"
        config = PipelineConfig(
            corpus_root=str(corpus), labels_path=str(tmp_path / "gone.csv"),
            output_dir=str(out), k=3,
        )
        with pytest.raises(StageFailure) as exc:
            run_pipeline(config)
        assert exc.value.stage == "labels"
        assert isinstance(exc.value.cause, LabelsNotFound)
        manifest_lines = (out / "MANIFEST").read_text().splitlines()
        assert "failed labels" in manifest_lines

    def test_report_json_layout(self, small_run):
        _, _, out = small_run
        payload = json.loads((out / "report.json").read_text())
        assert payload["k"] == 5
        assert set(payload["weighted"]) == {"precision", "recall", "f1"}
        assert len(payload["per_class"]) == 3
        assert len(payload["per_fold"]) == 5

    def test_confusion_csv_layout(self, small_run):
        _, _, out = small_run
        lines = (out / "confusion.csv").read_text().strip().splitlines()
        assert lines[0].split(",")[1:] == ["Adapter", "Builder", "Singleton"]
        assert len(lines) == 4

    def test_smote_variants_run(self, small_corpus, tmp_path):
        corpus, labels = small_corpus
        for i, smote in enumerate(("off", "test")):
            out = tmp_path / f"smote{i}"
            report = run_pipeline(PipelineConfig(
                corpus_root=str(corpus), labels_path=str(labels),
                output_dir=str(out), k=3, smote=smote, seed=2,
            ))
            assert report.metrics.weighted_f1 > 0

    def test_numeric_features_and_rf_mode(self, small_corpus, tmp_path):
        corpus, labels = small_corpus
        from dpdetect.classifier import EnsembleParams

        out = tmp_path / "variant"
        report = run_pipeline(PipelineConfig(
            corpus_root=str(corpus), labels_path=str(labels), output_dir=str(out),
            k=3, seed=2, append_numeric_features=True,
            ensemble=EnsembleParams(n_trees=30, mode="random_forest"),
        ))
        assert report.metrics.weighted_f1 > 50
        _, ensemble, scaler = load_bundle(out / "model.bundle")
        assert ensemble.dim == 107
        assert scaler is not None and len(scaler["min"]) == 7

    def test_train_fold_embedding_scope(self, small_corpus, tmp_path):
        corpus, labels = small_corpus
        from dpdetect.embedding import EmbedHyperparams

        out = tmp_path / "foldscope"
        report = run_pipeline(PipelineConfig(
            corpus_root=str(corpus), labels_path=str(labels), output_dir=str(out),
            k=3, seed=2, embed_scope="train-fold",
            embed=EmbedHyperparams(epochs=3),
        ))
        assert report.metrics.weighted_f1 > 50

    def test_invalid_config_rejected(self):
        with pytest.raises(ValueError):
            PipelineConfig(corpus_root="x", labels_path="y", output_dir="z", smote="sometimes")


class TestPredictFiles:
    def test_template_recognised(self, small_run, tmp_path):
        _, _, out = small_run
        manifest, _ = generate_synthetic_corpus({PatternLabel.SINGLETON: 1}, seed=99)
        probe = tmp_path / "probe"
        write_corpus(manifest, probe)
        files = [str(p) for p in sorted(probe.rglob("*.java"))]
        results, diagnostics = predict_files(out / "model.bundle", files)
        assert diagnostics == []
        assert len(results) == 1
        assert results[0].label is PatternLabel.SINGLETON
        assert 0 < results[0].confidence <= 1

    def test_unparseable_file_becomes_diagnostic(self, small_run, tmp_path):
        _, _, out = small_run
        bad = tmp_path / "Broken.java"
        bad.write_text("class Broken { void m() {")
        results, diagnostics = predict_files(out / "model.bundle", [str(bad)])
        assert results == []
        assert len(diagnostics) == 1

    def test_empty_file_list(self, small_run):
        _, _, out = small_run
        results, diagnostics = predict_files(out / "model.bundle", [])
        assert results == [] and diagnostics == []

    def test_corrupt_bundle(self, tmp_path):
        bad = tmp_path / "model.bundle"
        bad.write_bytes(b"not a zip at all")
        with pytest.raises(BundleFormatError):
            predict_files(bad, [])


class TestBundle:
    def test_round_trip(self, small_run, tmp_path):
        _, _, out = small_run
        embedding, ensemble, scaler = load_bundle(out / "model.bundle")
        target = tmp_path / "copy.bundle"
        save_bundle(target, embedding, ensemble, numeric_scaler=scaler)
        emb2, ens2, _ = load_bundle(target)
        assert emb2.vocabulary == embedding.vocabulary
        assert np.array_equal(emb2.input_vectors, embedding.input_vectors)
        probe = np.random.default_rng(0).random((5, ensemble.dim))
        from dpdetect import classifier as clf

        assert np.array_equal(clf.predict_proba(ensemble, probe), clf.predict_proba(ens2, probe))

    def test_missing_member_rejected(self, tmp_path):
        import zipfile

        path = tmp_path / "model.bundle"
        with zipfile.ZipFile(path, "w") as zf:
            zf.writestr("meta.json", "{}")
        with pytest.raises(BundleFormatError):
            load_bundle(path)


class TestCli:
    def test_eval_and_predict_round_trip(self, small_corpus, tmp_path, capsys):
        corpus, labels = small_corpus
        out = tmp_path / "cliout"
        rc = cli.main([
            "eval", "--corpus", str(corpus), "--labels", str(labels),
            "--out", str(out), "--k", "3", "--seed", "1",
        ])
        assert rc == 0
        assert (out / "report.json").exists()

        rc = cli.main(["report", "--report", str(out / "report.json")])
        assert rc == 0

        sample = next(iter(sorted(corpus.rglob("*.java"))))
        rc = cli.main(["predict", "--bundle", str(out / "model.bundle"), str(sample), "--json"])
        assert rc == 0
        captured = capsys.readouterr()
        assert "label" in captured.out

    def test_usage_error_exit_code_1(self):
        assert cli.main(["eval", "--corpus", "only"]) == 1

    def test_stage_failure_exit_code_2(self, small_corpus, tmp_path):
        corpus, _ = small_corpus
        rc = cli.main([
            "eval", "--corpus", str(corpus), "--labels", str(tmp_path / "missing.csv"),
            "--out", str(tmp_path / "o"),
        ])
        assert rc == 2

    def test_stage_subcommands(self, small_corpus, tmp_path):
        corpus, labels = small_corpus
        stage_dir = tmp_path / "stage"
        assert cli.main(["ingest", "--corpus", str(corpus), "--out", str(stage_dir)]) == 0
        assert cli.main([
            "sslr", "--corpus", str(corpus), "--manifest", str(stage_dir / "manifest.json"),
            "--out", str(stage_dir), "--dot", "--features-csv",
        ]) == 0
        assert cli.main([
            "embed", "--sslr", str(stage_dir / "corpus.sslr"), "--out", str(stage_dir),
            "--epochs", "3",
        ]) == 0
        assert cli.main([
            "train", "--corpus", str(corpus), "--labels", str(labels),
            "--sslr", str(stage_dir / "corpus.sslr"),
            "--embedding", str(stage_dir / "embedding.txt"),
            "--out", str(stage_dir), "--n-trees", "20",
        ]) == 0
        assert (stage_dir / "model.bundle").exists()
        assert (stage_dir / "callgraph.dot").exists()
        assert (stage_dir / "features_methods.csv").exists()

    def test_config_file_with_flag_override(self, small_corpus, tmp_path):
        corpus, labels = small_corpus
        cfg = tmp_path / "run.ini"
        cfg.write_text(
            "[evaluation]\nk = 3\nseed = 5\n\n[embedding]\nepochs = 4\n\n[classifier]\nn_trees = 25\n"
        )
        args = cli.build_parser().parse_args([
            "eval", "--corpus", str(corpus), "--labels", str(labels),
            "--out", str(tmp_path / "o"), "--config", str(cfg), "--k", "4",
        ])
        config = cli._build_pipeline_config(args)
        assert config.k == 4  # flag wins
        assert config.seed == 5
        assert config.embed.epochs == 4
        assert config.ensemble.n_trees == 25

    def test_config_file_missing(self, tmp_path):
        with pytest.raises(FileNotFoundError):
            load_config_file(tmp_path / "none.ini")
