"""Static call graph over a parsed corpus.

Nodes are (class, method, arity) identities; edges join callers to
callees with a resolved/external status.  Resolution looks up the
receiver's declared type (falling back to the enclosing class for
implicit receivers) and walks the extends chain within the corpus;
anything unmatched becomes an external edge.  External callees keep the
lookup class name when the receiver type was known and "?" otherwise.
"""
from __future__ import annotations

from dataclasses import dataclass, field

from .errors import UnknownMethodError
from .javaparser import ClassModel, CodeModel, ReceiverKind

RESOLVED = "resolved"
EXTERNAL = "external"


@dataclass(frozen=True, order=True)
class MethodId:
    class_name: str
    method_name: str
    arity: int


@dataclass(frozen=True)
class CallEdge:
    caller: MethodId
    callee: MethodId
    status: str


@dataclass
class CallGraph:
    nodes: frozenset[MethodId]
    edges: frozenset[CallEdge]
    _out: dict[MethodId, tuple[CallEdge, ...]] = field(repr=False, default_factory=dict)
    _in: dict[MethodId, tuple[MethodId, ...]] = field(repr=False, default_factory=dict)


class _ClassIndex:
    """Merged per-name view of declared classes and their method keys."""

    def __init__(self, classes: list[ClassModel]):
        self.extends: dict[str, str | None] = {}
        self.methods: dict[str, set[tuple[str, int]]] = {}
        for model in classes:
            if model.name not in self.methods:
                self.methods[model.name] = set()
                self.extends[model.name] = model.extends_name
            for m in model.methods:
                self.methods[model.name].add((m.name, len(m.parameters)))

    def resolve(self, class_name: str, method: str, arity: int) -> str | None:
        """Nearest declarer of method/arity along the extends chain, if any."""
        seen = set()
        current: str | None = class_name
        while current is not None and current in self.methods and current not in seen:
            seen.add(current)
            if (method, arity) in self.methods[current]:
                return current
            current = self.extends.get(current)
        return None


def build_call_graph(model: CodeModel) -> CallGraph:
    """One node per declared method, one edge per call site (deduplicated)."""
    classes = model.all_classes()
    index = _ClassIndex(classes)

    nodes: set[MethodId] = set()
    for cls in classes:
        for m in cls.methods:
            nodes.add(MethodId(cls.name, m.name, len(m.parameters)))

    edges: set[CallEdge] = set()
    for cls in classes:
        for m in cls.methods:
            caller = MethodId(cls.name, m.name, len(m.parameters))
            for site in m.call_sites:
                if site.receiver_kind is ReceiverKind.UNKNOWN:
                    callee = MethodId("?", site.callee_name, site.argument_count)
                    edges.add(CallEdge(caller, callee, EXTERNAL))
                    continue
                if site.receiver_kind is ReceiverKind.THIS_OR_IMPLICIT:
                    lookup = cls.name
                else:
                    lookup = site.receiver_type or "?"
                declarer = index.resolve(lookup, site.callee_name, site.argument_count)
                if declarer is None:
                    callee = MethodId(lookup, site.callee_name, site.argument_count)
                    edges.add(CallEdge(caller, callee, EXTERNAL))
                else:
                    callee = MethodId(declarer, site.callee_name, site.argument_count)
                    edges.add(CallEdge(caller, callee, RESOLVED))

    out: dict[MethodId, list[CallEdge]] = {}
    incoming: dict[MethodId, set[MethodId]] = {}
    for edge in edges:
        out.setdefault(edge.caller, []).append(edge)
        if edge.status == RESOLVED:
            incoming.setdefault(edge.callee, set()).add(edge.caller)

    graph = CallGraph(nodes=frozenset(nodes), edges=frozenset(edges))
    for caller, lst in out.items():
        graph._out[caller] = tuple(sorted(lst, key=lambda e: e.callee))
    for callee, callers_set in incoming.items():
        graph._in[callee] = tuple(sorted(callers_set))
    return graph


def callees(graph: CallGraph, m: MethodId, external_only: bool = False) -> list[MethodId]:
    """Distinct callees of m, optionally restricted to other classes.

    ``external_only`` follows the feature definition: keep only callees
    whose class differs from the caller's class (out-of-corpus callees
    included).
    """
    if m not in graph.nodes:
        raise UnknownMethodError(f"not a graph node: {m}")
    seen: dict[MethodId, None] = {}
    for edge in graph._out.get(m, ()):
        if external_only and edge.callee.class_name == m.class_name:
            continue
        seen[edge.callee] = None
    return sorted(seen)


def callers(graph: CallGraph, m: MethodId) -> list[MethodId]:
    """Distinct resolved callers of m; external edges never appear here."""
    if m not in graph.nodes:
        raise UnknownMethodError(f"not a graph node: {m}")
    return list(graph._in.get(m, ()))


def to_dot(graph: CallGraph) -> str:
    """DOT rendering for inspection (CLI --dot)."""
    lines = ["digraph callgraph {"]

    def fmt(mid: MethodId) -> str:
        return f'"{mid.class_name}.{mid.method_name}/{mid.arity}"'

    for edge in sorted(graph.edges, key=lambda e: (e.caller, e.callee)):
        style = "" if edge.status == RESOLVED else " [style=dashed]"
        lines.append(f"  {fmt(edge.caller)} -> {fmt(edge.callee)}{style};")
    lines.append("}")
    return "\n".join(lines) + "\n"
