"""The 15 structural/lexical feature records computed per class and method.

Class records carry the name, modifiers and the two inheritance bits;
method records carry the signature facts, statement-kind multiset,
counts of locals/calls/lines, and the four call-graph derived fields:
distinct other-class callees (count + names) and distinct resolved
callers (count + names).  Call counts are per call expression
(multiplicity); the graph-derived fields count distinct methods.
"""
from __future__ import annotations

from collections import Counter
from dataclasses import dataclass

from .callgraph import CallGraph, MethodId, callees, callers
from .corpus import SourceFile
from .javaparser import ClassModel, MethodModel


@dataclass(frozen=True)
class ClassFeatureRecord:
    class_name: str
    class_modifiers: frozenset[str]
    class_implements: int  # 0/1
    class_extends: int  # 0/1


@dataclass(frozen=True)
class MethodFeatureRecord:
    method_name: str
    method_params: tuple[tuple[str, str], ...]
    return_type: str
    body_line_types: tuple[tuple[str, int], ...]  # statement-kind multiset
    num_variables: int
    num_method_calls: int
    num_lines: int
    incoming_method_count: int
    incoming_names: tuple[str, ...]
    outgoing_method_count: int
    outgoing_names: tuple[str, ...]


def extract_class_features(c: ClassModel) -> ClassFeatureRecord:
    return ClassFeatureRecord(
        class_name=c.name,
        class_modifiers=frozenset(c.modifiers),
        class_implements=1 if c.implements_names else 0,
        class_extends=1 if c.extends_name is not None else 0,
    )


def _kind_multiset(m: MethodModel) -> tuple[tuple[str, int], ...]:
    counts = Counter(s.kind.value for s in m.statements)
    return tuple(sorted(counts.items()))


def extract_method_features(
    m: MethodModel, owner: ClassModel, g: CallGraph
) -> MethodFeatureRecord:
    """Feature record for one method; requires the corpus call graph.

    Raises UnknownMethodError when the method has no graph node.
    """
    mid = MethodId(owner.name, m.name, len(m.parameters))
    called = callees(g, mid, external_only=True)
    calling = callers(g, mid)
    return MethodFeatureRecord(
        method_name=m.name,
        method_params=tuple(m.parameters),
        return_type=m.return_type,
        body_line_types=_kind_multiset(m),
        num_variables=m.local_variable_count,
        num_method_calls=len(m.call_sites),
        num_lines=m.line_count,
        incoming_method_count=len(called),
        incoming_names=tuple(c.method_name for c in called),
        outgoing_method_count=len(calling),
        outgoing_names=tuple(c.method_name for c in calling),
    )


@dataclass(frozen=True)
class ClassEntry:
    model: ClassModel
    record: ClassFeatureRecord
    methods: tuple[tuple[MethodModel, MethodFeatureRecord], ...]


@dataclass(frozen=True)
class FileFeatures:
    source: SourceFile
    entries: tuple[ClassEntry, ...]


def extract_file_features(
    source: SourceFile, models: list[ClassModel], g: CallGraph
) -> FileFeatures:
    entries = []
    for model in models:
        methods = tuple(
            (m, extract_method_features(m, model, g)) for m in model.methods
        )
        entries.append(ClassEntry(model=model, record=extract_class_features(model), methods=methods))
    return FileFeatures(source=source, entries=tuple(entries))


# CSV dumps (CLI --features-csv): class rows and method rows live in
# separate files because their columns differ.

CLASS_CSV_HEADER = ["file", "class_name", "modifiers", "implements", "extends"]
METHOD_CSV_HEADER = [
    "file", "class_name", "method_name", "params", "return_type",
    "body_line_types", "num_variables", "num_method_calls", "num_lines",
    "incoming_method_count", "incoming_names", "outgoing_method_count",
    "outgoing_names",
]


def class_csv_row(ff: FileFeatures, entry: ClassEntry) -> list[str]:
    r = entry.record
    return [
        ff.source.full_path,
        r.class_name,
        " ".join(sorted(r.class_modifiers)),
        str(r.class_implements),
        str(r.class_extends),
    ]


def method_csv_row(ff: FileFeatures, entry: ClassEntry, record: MethodFeatureRecord) -> list[str]:
    return [
        ff.source.full_path,
        entry.record.class_name,
        record.method_name,
        " ".join(f"{n}:{t}" for n, t in record.method_params),
        record.return_type,
        " ".join(f"{k}={v}" for k, v in record.body_line_types),
        str(record.num_variables),
        str(record.num_method_calls),
        str(record.num_lines),
        str(record.incoming_method_count),
        " ".join(record.incoming_names),
        str(record.outgoing_method_count),
        " ".join(record.outgoing_names),
    ]
