import pytest

from dpdetect.corpus import PatternLabel, generate_synthetic_corpus
from dpdetect.errors import JavaSyntaxError
from dpdetect.javaparser import (
    CorpusManifest,
    ReceiverKind,
    StatementKind,
    parse_corpus,
    parse_source,
)


class TestParseFile:
    def test_simple_class_mapping(self):
        models = parse_source("public class Foo implements Bar { void run(){} }")
        assert len(models) == 1
        foo = models[0]
        assert foo.name == "Foo"
        assert foo.kind == "class"
        assert foo.modifiers == {"public"}
        assert foo.implements_names == ["Bar"]
        assert foo.extends_name is None
        assert len(foo.methods) == 1
        run = foo.methods[0]
        assert (run.name, run.return_type, run.parameters) == ("run", "void", [])

    def test_two_top_level_classes_in_source_order(self):
        models = parse_source("class Zed {} class Alpha {}")
        assert [m.name for m in models] == ["Zed", "Alpha"]

    def test_unbalanced_braces_positioned_error(self):
        with pytest.raises(JavaSyntaxError) as exc:
            parse_source("public class Foo {\n  void run() {\n}")
        assert exc.value.line >= 1 and exc.value.column >= 1

    def test_lambda_rejected(self):
        with pytest.raises(JavaSyntaxError, match="Java 8"):
            parse_source("class A { void m() { Runnable r = () -> {}; } }")

    def test_line_count_excludes_brace_lines(self):
        src = "class A {\n  void m() {\n    int x = 1;\n    x = 2;\n  }\n  void e() { }\n}"
        a = parse_source(src)[0]
        m, e = a.methods
        assert m.line_count == 2
        assert e.line_count == 0

    def test_abstract_and_interface_methods_have_no_body(self):
        src = "interface I { int size(); }\nabstract class B { abstract void go(int a); }"
        i, b = parse_source(src)
        assert i.kind == "interface"
        assert i.methods[0].line_count == 0
        assert i.methods[0].statements == []
        assert b.methods[0].parameters == [("a", "int")]

    def test_interface_extends_recorded(self):
        i = parse_source("interface I extends J, K { }")[0]
        assert i.extends_name == "J"
        assert i.implements_names == ["K"]

    def test_nested_class_named_outer_inner(self):
        models = parse_source("class Outer { class Inner { void f() {} } void g() {} }")
        assert {m.name for m in models} == {"Outer", "Outer.Inner"}
        outer = next(m for m in models if m.name == "Outer")
        assert [meth.name for meth in outer.methods] == ["g"]

    def test_generics_erased(self):
        src = "class A { java.util.Map<String, java.util.List<Integer>> table; void m(java.util.List<String> xs) { } }"
        a = parse_source(src)[0]
        assert a.field_names_and_types == [("table", "Map")]
        assert a.methods[0].parameters == [("xs", "List")]

    def test_constructor_flagged(self):
        a = parse_source("class A { A(int x) { this.x = x; } }")[0]
        assert a.methods[0].return_type == "constructor"
        assert a.methods[0].parameters == [("x", "int")]

    def test_determinism(self):
        src = "class A { void m() { int a = 0; p(a); } void p(int a) {} }"
        from dpdetect.javaparser import dump_model_json
        from dpdetect.corpus import SourceFile

        f = SourceFile(project_id="p", relative_path="A.java", content=src)
        m1 = parse_corpus(CorpusManifest(files=(f,)))
        m2 = parse_corpus(CorpusManifest(files=(f,)))
        assert dump_model_json(m1) == dump_model_json(m2)


class TestStatements:
    def test_statement_kinds(self):
        src = """
class A {
    void m(boolean flag) {
        int x = 0;
        x = 1;
        x++;
        if (flag) { x = 2; } else { x = 3; }
        while (flag) { step(); }
        for (int i = 0; i < 3; i++) { }
        do { } while (flag);
        switch (x) { case 1: break; default: break; }
        try { risky(); } catch (Exception e) { } finally { }
        throw new RuntimeException();
    }
    void step() {}
    void risky() {}
}
"""
        a = parse_source(src)[0]
        kinds = [s.kind for s in a.methods[0].statements]
        assert kinds.count(StatementKind.LOCAL_DECLARATION) == 1
        assert kinds.count(StatementKind.ASSIGNMENT) == 4  # x=1, x++, x=2, x=3
        assert kinds.count(StatementKind.CONDITIONAL) == 2  # if, switch
        assert kinds.count(StatementKind.LOOP) == 3
        assert kinds.count(StatementKind.INVOCATION) == 2  # step(), risky()
        assert a.methods[0].local_variable_count == 1  # for-init not counted

    def test_multi_declarator_counts_once(self):
        a = parse_source("class A { void m() { int x = 1, y = 2; } }")[0]
        assert a.methods[0].local_variable_count == 1

    def test_return_statement(self):
        a = parse_source("class A { int m() { return compute(); } int compute() { return 1; } }")[0]
        kinds = [s.kind for s in a.methods[0].statements]
        assert kinds == [StatementKind.RETURN]
        assert a.methods[0].call_sites[0].callee_name == "compute"


class TestCallSites:
    def test_receiver_classification(self):
        src = """
class A {
    private B field;
    void m(B param) {
        local().size();
        field.n();
        param.n();
        B local = other();
        local.n();
        this.hidden();
        hidden();
        Helper.of(1, 2);
        System.out.println("x");
    }
    B local() { return null; }
    B other() { return null; }
    void hidden() {}
}
"""
        a = parse_source(src)[0]
        m = a.methods[0]
        sites = {(c.callee_name, c.receiver_kind, c.receiver_type, c.argument_count) for c in m.call_sites}
        assert ("local", ReceiverKind.THIS_OR_IMPLICIT, None, 0) in sites
        assert ("size", ReceiverKind.UNKNOWN, None, 0) in sites  # call on a call result
        assert ("n", ReceiverKind.VARIABLE, "B", 0) in sites
        assert ("hidden", ReceiverKind.THIS_OR_IMPLICIT, None, 0) in sites
        assert ("of", ReceiverKind.TYPE_NAME, "Helper", 2) in sites
        assert ("println", ReceiverKind.UNKNOWN, None, 1) in sites

    def test_new_is_not_a_call_site(self):
        a = parse_source("class A { void m() { B b = new B(); } }")[0]
        assert a.methods[0].call_sites == []

    def test_argument_counts(self):
        a = parse_source("class A { void m() { f(); f(1); f(g(1, 2), 3); } }")[0]
        argcs = sorted(c.argument_count for c in a.methods[0].call_sites)
        # f(), g(1,2) nested, f(1), f(g(...), 3)
        assert argcs == [0, 1, 2, 2]

    def test_call_sites_cover_embedded_invocations(self):
        # one CallSite per call expression, even outside invocation statements
        src = "class A { void m() { int x = f(g()); if (h()) { } } int f(int v){return v;} int g(){return 1;} boolean h(){return true;} }"
        a = parse_source(src)[0]
        m = a.methods[0]
        invocation_stmts = sum(1 for s in m.statements if s.kind == StatementKind.INVOCATION)
        assert len(m.call_sites) == 3
        assert len(m.call_sites) >= invocation_stmts

    def test_anonymous_class_folds_into_method(self):
        src = """
class Outer {
    void useAnon() {
        Runnable r = new Runnable() {
            public void run() { touch(); state = 1; }
        };
        r.run();
    }
    void touch() {}
}
"""
        outer = parse_source(src)[0]
        m = outer.methods[0]
        callees = [c.callee_name for c in m.call_sites]
        assert "touch" in callees and "run" in callees
        kinds = [s.kind for s in m.statements]
        assert StatementKind.ASSIGNMENT in kinds  # folded from the anonymous body


class TestParseCorpus:
    def _manifest(self, contents):
        from dpdetect.corpus import SourceFile

        files = tuple(
            SourceFile(project_id="p", relative_path=f"F{i}.java", content=c)
            for i, c in enumerate(contents)
        )
        return CorpusManifest(files=files)

    def test_all_valid(self):
        model = parse_corpus(self._manifest(["class A {}", "class B {}", "class C {}"]))
        assert len(model.classes_by_file) == 3
        assert model.diagnostics == []

    def test_malformed_becomes_diagnostic(self):
        model = parse_corpus(self._manifest(["class A {}", "class B {", "class C {}"]))
        assert len(model.classes_by_file) == 2
        assert len(model.diagnostics) == 1
        assert model.diagnostics[0][0] == "p/F1.java"

    def test_empty_manifest(self):
        model = parse_corpus(CorpusManifest(files=()))
        assert model.classes_by_file == {}
        assert model.diagnostics == []


def test_synthetic_corpus_parses_clean():
    manifest, _ = generate_synthetic_corpus({label: 3 for label in PatternLabel}, seed=2)
    model = parse_corpus(manifest)
    assert model.diagnostics == []
    assert len(model.classes_by_file) == len(manifest.files)
