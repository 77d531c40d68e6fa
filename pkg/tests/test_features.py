import pytest

from dpdetect.callgraph import build_call_graph
from dpdetect.corpus import PatternLabel, generate_synthetic_corpus
from dpdetect.errors import UnknownMethodError
from dpdetect.features import (
    extract_class_features,
    extract_file_features,
    extract_method_features,
)
from dpdetect.javaparser import parse_corpus, parse_source


class TestClassFeatures:
    def test_implements_only(self):
        rec = extract_class_features(parse_source("public class Foo implements Bar {}")[0])
        assert rec.class_name == "Foo"
        assert rec.class_modifiers == frozenset({"public"})
        assert (rec.class_implements, rec.class_extends) == (1, 0)

    def test_extends_only(self):
        rec = extract_class_features(parse_source("class Baz extends Qux {}")[0])
        assert rec.class_modifiers == frozenset({"default"})
        assert (rec.class_implements, rec.class_extends) == (0, 1)

    def test_interface_extension_counts_as_extends(self):
        rec = extract_class_features(parse_source("interface I extends J {}")[0])
        assert rec.class_extends == 1


def _fixture_records(fixture_file, fixture_model, fixture_graph):
    return extract_file_features(
        fixture_file, fixture_model.classes_by_file[fixture_file.full_path], fixture_graph
    )


class TestGoldenFixture:
    """Hand-computed records for the 3-class fixture, frozen."""

    def test_method_m(self, fixture_file, fixture_model, fixture_graph):
        ff = _fixture_records(fixture_file, fixture_model, fixture_graph)
        m = dict((rec.method_name, rec) for e in ff.entries for _, rec in e.methods)["m"]
        assert m.return_type == "void"
        assert m.method_params == ()
        assert m.body_line_types == (("invocation", 2),)
        assert m.num_variables == 0
        assert m.num_method_calls == 2  # helper.n() and p()
        assert m.num_lines == 2
        assert m.incoming_method_count == 1  # only the other-class callee B.n
        assert m.incoming_names == ("n",)
        assert m.outgoing_method_count == 0

    def test_method_n_called_by_two(self, fixture_file, fixture_model, fixture_graph):
        ff = _fixture_records(fixture_file, fixture_model, fixture_graph)
        n = dict((rec.method_name, rec) for e in ff.entries for _, rec in e.methods)["n"]
        assert n.outgoing_method_count == 2
        assert n.outgoing_names == ("m", "q")
        assert n.body_line_types == (("return", 1),)

    def test_method_q(self, fixture_file, fixture_model, fixture_graph):
        ff = _fixture_records(fixture_file, fixture_model, fixture_graph)
        q = dict((rec.method_name, rec) for e in ff.entries for _, rec in e.methods)["q"]
        assert q.num_variables == 1
        assert q.num_method_calls == 2  # b.n() and println; new B() is not a call
        assert q.num_lines == 3
        assert q.incoming_method_count == 2  # ?.println and B.n
        assert q.incoming_names == ("println", "n")

    def test_empty_body_method(self, fixture_file, fixture_model, fixture_graph):
        ff = _fixture_records(fixture_file, fixture_model, fixture_graph)
        p = dict((rec.method_name, rec) for e in ff.entries for _, rec in e.methods)["p"]
        assert p.body_line_types == ()
        assert p.num_variables == 0
        assert p.num_method_calls == 0
        assert p.num_lines == 0
        assert p.outgoing_method_count == 1  # called by A.m

    def test_class_records(self, fixture_file, fixture_model, fixture_graph):
        ff = _fixture_records(fixture_file, fixture_model, fixture_graph)
        by_name = {e.record.class_name: e.record for e in ff.entries}
        assert by_name["A"].class_modifiers == frozenset({"public"})
        assert by_name["B"].class_modifiers == frozenset({"default"})
        assert all(r.class_implements == 0 and r.class_extends == 0 for r in by_name.values())


class TestInvariants:
    def test_name_counts_match(self, fixture_file, fixture_model, fixture_graph):
        ff = _fixture_records(fixture_file, fixture_model, fixture_graph)
        for entry in ff.entries:
            for _, rec in entry.methods:
                assert len(rec.incoming_names) == rec.incoming_method_count
                assert len(rec.outgoing_names) == rec.outgoing_method_count
                assert rec.incoming_method_count <= rec.num_method_calls

    def test_f12_le_f10_over_synthetic_corpus(self):
        manifest, _ = generate_synthetic_corpus({label: 2 for label in PatternLabel}, seed=6)
        model = parse_corpus(manifest)
        graph = build_call_graph(model)
        checked = 0
        for source in manifest.files:
            ff = extract_file_features(source, model.classes_by_file[source.full_path], graph)
            for entry in ff.entries:
                for _, rec in entry.methods:
                    assert rec.incoming_method_count <= rec.num_method_calls
                    checked += 1
        assert checked > 50

    def test_re_extraction_identical(self, fixture_file, fixture_model, fixture_graph):
        a = _fixture_records(fixture_file, fixture_model, fixture_graph)
        b = _fixture_records(fixture_file, fixture_model, fixture_graph)
        assert a == b

    def test_method_absent_from_graph(self, fixture_model, fixture_graph):
        foreign = parse_source("class Zed { void zz() {} }")[0]
        with pytest.raises(UnknownMethodError):
            extract_method_features(foreign.methods[0], foreign, fixture_graph)
