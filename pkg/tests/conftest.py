"""Shared fixtures: the hand-built 3-class corpus and helpers."""
import pytest

from dpdetect.callgraph import build_call_graph
from dpdetect.corpus import CorpusManifest, SourceFile
from dpdetect.javaparser import parse_corpus

# Three classes exercising same-class calls, typed receivers, an
# out-of-corpus call and a method with two distinct corpus callers.
FIXTURE_SOURCE = """\
public class A {
    private B helper;
    public void m() {
        helper.n();
        p();
    }
    void p() { }
}

class B {
    public int n() { return 1; }
}

class C {
    void q() {
        B b = new B();
        b.n();
        System.out.println("x");
    }
}
"""


@pytest.fixture
def fixture_file() -> SourceFile:
    return SourceFile(project_id="p1", relative_path="src/A.java", content=FIXTURE_SOURCE)


@pytest.fixture
def fixture_manifest(fixture_file) -> CorpusManifest:
    return CorpusManifest(files=(fixture_file,))


@pytest.fixture
def fixture_model(fixture_manifest):
    return parse_corpus(fixture_manifest)


@pytest.fixture
def fixture_graph(fixture_model):
    return build_call_graph(fixture_model)
