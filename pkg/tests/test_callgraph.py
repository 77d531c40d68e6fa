import pytest

from dpdetect.callgraph import (
    EXTERNAL,
    RESOLVED,
    MethodId,
    build_call_graph,
    callees,
    callers,
    to_dot,
)
from dpdetect.corpus import CorpusManifest, SourceFile
from dpdetect.errors import UnknownMethodError
from dpdetect.javaparser import parse_corpus


def _graph(src: str):
    f = SourceFile(project_id="p", relative_path="G.java", content=src)
    model = parse_corpus(CorpusManifest(files=(f,)))
    return build_call_graph(model)


class TestResolution:
    def test_same_class_implicit_receiver(self):
        g = _graph("class A { void m() { n(); } void n() {} }")
        edge = next(iter(g.edges))
        assert edge.caller == MethodId("A", "m", 0)
        assert edge.callee == MethodId("A", "n", 0)
        assert edge.status == RESOLVED

    def test_typed_receiver_resolves_other_class(self):
        g = _graph("class A { B b; void m() { b.run(); } } class B { void run() {} }")
        assert any(
            e.callee == MethodId("B", "run", 0) and e.status == RESOLVED for e in g.edges
        )

    def test_out_of_corpus_is_external_with_unknown_class(self):
        g = _graph('class A { void m() { System.out.println("x"); } }')
        edge = next(iter(g.edges))
        assert edge.callee == MethodId("?", "println", 1)
        assert edge.status == EXTERNAL

    def test_known_receiver_type_unknown_method_keeps_class(self):
        g = _graph("class A { String s; void m() { s.trim(); } }")
        edge = next(iter(g.edges))
        assert edge.callee == MethodId("String", "trim", 0)
        assert edge.status == EXTERNAL

    def test_inheritance_dispatch_to_nearest_ancestor(self):
        src = """
class Base { void go() {} }
class Mid extends Base { }
class Leaf extends Mid { }
class User { Leaf leaf; void m() { leaf.go(); } }
"""
        g = _graph(src)
        assert any(
            e.callee == MethodId("Base", "go", 0) and e.status == RESOLVED for e in g.edges
        )

    def test_override_shadows_ancestor(self):
        src = """
class Base { void go() {} }
class Leaf extends Base { void go() {} }
class User { Leaf leaf; void m() { leaf.go(); } }
"""
        g = _graph(src)
        resolved = [e for e in g.edges if e.status == RESOLVED]
        assert [e.callee for e in resolved] == [MethodId("Leaf", "go", 0)]

    def test_arity_mismatch_goes_external(self):
        g = _graph("class A { void m() { n(1); } void n() {} }")
        edge = next(iter(g.edges))
        assert edge.status == EXTERNAL
        assert edge.callee == MethodId("A", "n", 1)

    def test_edges_deduplicated(self):
        g = _graph("class A { void m() { n(); n(); n(); } void n() {} }")
        assert len(g.edges) == 1


class TestQueries:
    def test_three_distinct_callees(self):
        src = """
class A { void a() { b(); c(); d(); } void b() {} void c() {} void d() {} }
"""
        g = _graph(src)
        result = callees(g, MethodId("A", "a", 0))
        assert len(result) == 3

    def test_external_only_filters_same_class(self, fixture_graph):
        result = callees(fixture_graph, MethodId("A", "m", 0), external_only=True)
        assert result == [MethodId("B", "n", 0)]

    def test_no_outgoing_edges(self, fixture_graph):
        assert callees(fixture_graph, MethodId("A", "p", 0)) == []

    def test_callers_inverse(self, fixture_graph):
        assert callers(fixture_graph, MethodId("B", "n", 0)) == [
            MethodId("A", "m", 0),
            MethodId("C", "q", 0),
        ]

    def test_recursive_self_caller(self):
        g = _graph("class A { void m() { m(); } }")
        assert callers(g, MethodId("A", "m", 0)) == [MethodId("A", "m", 0)]

    def test_never_called(self, fixture_graph):
        assert callers(fixture_graph, MethodId("C", "q", 0)) == []

    def test_unknown_method_raises(self, fixture_graph):
        with pytest.raises(UnknownMethodError):
            callees(fixture_graph, MethodId("Nope", "x", 0))
        with pytest.raises(UnknownMethodError):
            callers(fixture_graph, MethodId("Nope", "x", 0))

    def test_ordering_is_canonical(self):
        src = "class A { void m() { z(); a(); } void z() {} void a() {} }"
        g = _graph(src)
        result = callees(g, MethodId("A", "m", 0))
        assert result == sorted(result)


class TestInvariants:
    def test_inverse_consistency(self, fixture_graph):
        for node in fixture_graph.nodes:
            for callee in callees(fixture_graph, node):
                if callee in fixture_graph.nodes:
                    resolved = any(
                        e.caller == node and e.callee == callee and e.status == RESOLVED
                        for e in fixture_graph.edges
                    )
                    if resolved:
                        assert node in callers(fixture_graph, callee)

    def test_externals_never_in_callers(self, fixture_graph):
        for node in fixture_graph.nodes:
            for caller in callers(fixture_graph, node):
                assert caller in fixture_graph.nodes

    def test_edge_count_bounded_by_call_sites(self, fixture_model, fixture_graph):
        total_sites = sum(
            len(m.call_sites)
            for models in fixture_model.classes_by_file.values()
            for c in models
            for m in c.methods
        )
        assert len(fixture_graph.edges) <= total_sites

    def test_deterministic_construction(self, fixture_model):
        g1 = build_call_graph(fixture_model)
        g2 = build_call_graph(fixture_model)
        assert g1.nodes == g2.nodes
        assert g1.edges == g2.edges


def test_dot_export(fixture_graph):
    dot = to_dot(fixture_graph)
    assert dot.startswith("digraph")
    assert '"A.m/0" -> "B.n/0"' in dot
    assert "style=dashed" in dot  # external edge styling
