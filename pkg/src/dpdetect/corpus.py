"""Corpus ingestion, ground-truth labels and synthetic corpus generation.

A corpus is a directory tree of Java projects.  Scanning applies the
documented exclusion rules (test files; non-.java files are never
scanned), yielding a deterministic manifest.  Labels arrive as a CSV
keyed by (project_id, path) and map source files to one of the 13
pattern labels.
"""
from __future__ import annotations

import csv
import enum
import json
import logging
import random
from dataclasses import dataclass, field
from fnmatch import fnmatch
from pathlib import Path

from .errors import (
    DuplicatePathError,
    IngestError,
    LabelsNotFound,
    MissingFileError,
    UnknownLabelError,
)

logger = logging.getLogger(__name__)


class PatternLabel(enum.Enum):
    """Closed 13-value label set: 12 design patterns plus None.

    Factory subsumes both Abstract Factory and Factory Method; None marks
    files that implement no standard pattern.
    """

    ADAPTER = "Adapter"
    BUILDER = "Builder"
    DECORATOR = "Decorator"
    FACADE = "Facade"
    FACTORY = "Factory"
    MEMENTO = "Memento"
    OBSERVER = "Observer"
    PROTOTYPE = "Prototype"
    PROXY = "Proxy"
    SINGLETON = "Singleton"
    VISITOR = "Visitor"
    WRAPPER = "Wrapper"
    NONE = "None"

    @classmethod
    def from_token(cls, token: str) -> "PatternLabel":
        for member in cls:
            if member.value == token:
                return member
        raise UnknownLabelError(f"unknown pattern label {token!r}")

    def __lt__(self, other: "PatternLabel") -> bool:
        order = list(type(self))
        return order.index(self) < order.index(other)


LABEL_ORDER: tuple[PatternLabel, ...] = tuple(PatternLabel)


@dataclass(frozen=True)
class SourceFile:
    """One .java file of the corpus.

    relative_path is relative to the project directory; full_path
    (project_id/relative_path) is the unique identity within a manifest.
    """

    project_id: str
    relative_path: str
    content: str

    @property
    def full_path(self) -> str:
        return f"{self.project_id}/{self.relative_path}"


@dataclass(frozen=True)
class LabelledInstance:
    source: SourceFile
    class_name: str
    label: PatternLabel


@dataclass(frozen=True)
class CorpusManifest:
    """Scan result: retained files plus (path, reason) exclusions."""

    files: tuple[SourceFile, ...]
    excluded: tuple[tuple[str, str], ...] = ()

    def __post_init__(self):
        seen = set()
        for f in self.files:
            if f.full_path in seen:
                raise DuplicatePathError(f"duplicate path in manifest: {f.full_path}")
            seen.add(f.full_path)

    def find(self, project_id: str, relative_path: str) -> SourceFile | None:
        for f in self.files:
            if f.project_id == project_id and f.relative_path == relative_path:
                return f
        return None

    def to_json(self) -> str:
        rows = [{"project_id": f.project_id, "path": f.relative_path} for f in self.files]
        return json.dumps(rows, indent=2) + "\n"


@dataclass(frozen=True)
class FilterRules:
    """Exclusion heuristics applied during scanning.

    The glob rules target unit-test files; anything that is not a .java
    file is never scanned in the first place.
    """

    basename_globs: tuple[str, ...] = ("*Test.java", "Test*.java")
    path_fragments: tuple[str, ...] = ("src/test/",)

    def exclusion_reason(self, posix_path: str) -> str | None:
        basename = posix_path.rsplit("/", 1)[-1]
        for pattern in self.basename_globs:
            if fnmatch(basename, pattern):
                return f"test-file rule: {pattern}"
        for fragment in self.path_fragments:
            if fragment in posix_path + "/":
                return f"test-tree rule: {fragment}"
        return None


def ingest_corpus(
    root: str | Path,
    filters: FilterRules | None = None,
    project_id: str | None = None,
) -> CorpusManifest:
    """Scan ``root`` for .java files and apply the exclusion rules.

    By default the first path segment under root names the project and
    relative paths are taken from below it; passing ``project_id``
    instead assigns every file to that project with root-relative paths.
    Ordering is lexicographic by (project_id, path), so two scans of the
    same tree produce identical manifests.
    """
    rules = filters or FilterRules()
    root = Path(root)
    if not root.is_dir():
        raise IngestError(f"corpus root is not a readable directory: {root}")

    entries: list[SourceFile] = []
    excluded: list[tuple[str, str]] = []
    for path in root.rglob("*.java"):
        if not path.is_file():
            continue
        posix = path.relative_to(root).as_posix()
        reason = rules.exclusion_reason(posix)
        if reason is not None:
            excluded.append((posix, reason))
            continue
        if project_id is not None:
            pid, rel = project_id, posix
        elif "/" in posix:
            pid, rel = posix.split("/", 1)
        else:
            pid, rel = "", posix
        try:
            content = path.read_text(encoding="utf-8", errors="replace")
        except OSError as exc:
            excluded.append((posix, f"unreadable: {exc}"))
            continue
        entries.append(SourceFile(project_id=pid, relative_path=rel, content=content))

    entries.sort(key=lambda f: (f.project_id, f.relative_path))
    excluded.sort()
    if not entries:
        logger.warning("no .java files retained under %s", root)
    return CorpusManifest(files=tuple(entries), excluded=tuple(excluded))


LABELS_CSV_HEADER = ["project_id", "path", "class_name", "label"]


def load_labels(label_file: str | Path, manifest: CorpusManifest) -> list[LabelledInstance]:
    """Read the labels CSV and resolve each row against the manifest.

    Expected header: project_id,path,class_name,label. Label tokens are
    the case-sensitive enum names; rows referencing files outside the
    manifest fail loudly.
    """
    label_file = Path(label_file)
    if not label_file.is_file():
        raise LabelsNotFound(f"labels file not found: {label_file}")

    by_key = {(f.project_id, f.relative_path): f for f in manifest.files}
    instances: list[LabelledInstance] = []
    with label_file.open(newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        for lineno, row in enumerate(reader, start=1):
            if not row or all(not cell.strip() for cell in row):
                continue
            if lineno == 1 and [c.strip() for c in row] == LABELS_CSV_HEADER:
                continue
            if len(row) != 4:
                raise UnknownLabelError(f"labels row {lineno}: expected 4 fields, got {len(row)}")
            pid, path, class_name, token = (cell.strip() for cell in row)
            try:
                label = PatternLabel.from_token(token)
            except UnknownLabelError as exc:
                raise UnknownLabelError(f"labels row {lineno}: {exc}") from None
            source = by_key.get((pid, path))
            if source is None:
                raise MissingFileError(
                    f"labels row {lineno}: no manifest file {pid}/{path}"
                )
            if not class_name:
                raise UnknownLabelError(f"labels row {lineno}: empty class name")
            instances.append(LabelledInstance(source=source, class_name=class_name, label=label))
    return instances


def write_labels_csv(instances: list[LabelledInstance], path: str | Path) -> None:
    with Path(path).open("w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(LABELS_CSV_HEADER)
        for inst in instances:
            writer.writerow(
                [inst.source.project_id, inst.source.relative_path, inst.class_name, inst.label.value]
            )


def write_corpus(manifest: CorpusManifest, root: str | Path) -> None:
    """Materialise an in-memory manifest as files under ``root``."""
    root = Path(root)
    for f in manifest.files:
        target = root / f.project_id / f.relative_path
        target.parent.mkdir(parents=True, exist_ok=True)
        target.write_text(f.content, encoding="utf-8")


# ---------------------------------------------------------------------------
# Synthetic corpus generation
# ---------------------------------------------------------------------------

_NOUNS = [
    "Account", "Report", "Session", "Cache", "Widget", "Order", "Invoice",
    "Channel", "Device", "Profile", "Ticket", "Message", "Document", "Task",
    "Catalog", "Payment", "Gateway", "Engine", "Router", "Storage",
]

_FIELD_WORDS = ["value", "name", "state", "count", "owner", "status", "token", "limit"]

_FILLER_METHODS = [
    ("describe", "String", '        return "{noun}";'),
    ("reset", "void", "        this.{field} = 0;"),
    ("size", "int", "        return this.{field};"),
]


@dataclass
class _Ctx:
    """Per-file naming context drawn from the seeded RNG."""

    noun: str
    field: str
    index: int
    rng: random.Random

    @property
    def cls(self) -> str:
        return f"{self.noun}{self.index}"


def _filler(ctx: _Ctx, count: int) -> str:
    """A few unrelated methods so files are not pure templates."""
    parts = []
    picks = ctx.rng.sample(_FILLER_METHODS, k=min(count, len(_FILLER_METHODS)))
    for name, ret, body in picks:
        body = body.format(noun=ctx.noun, field=ctx.field)
        default = "null" if ret == "String" else "0"
        if ret == "void":
            parts.append(f"    public void {name}() {{\n{body}\n    }}\n")
        else:
            parts.append(f"    public {ret} {name}() {{\n{body}\n        // fallback {default}\n    }}\n")
    return "\n".join(parts)


def _singleton(ctx: _Ctx) -> str:
    c = ctx.cls
    return f"""public class {c} {{
    private static {c} instance;
    private int {ctx.field};

    private {c}() {{
        this.{ctx.field} = 0;
    }}

    public static {c} getInstance() {{
        if (instance == null) {{
            instance = new {c}();
        }}
        return instance;
    }}

{_filler(ctx, 2)}}}
"""


def _observer(ctx: _Ctx) -> str:
    c = ctx.cls
    return f"""public class {c}Subject {{
    private java.util.List<{c}Listener> listeners;
    private int {ctx.field};

    public void attach({c}Listener listener) {{
        listeners.add(listener);
    }}

    public void detach({c}Listener listener) {{
        listeners.remove(listener);
    }}

    public void notifyObservers() {{
        for (int i = 0; i < listeners.size(); i = i + 1) {{
            {c}Listener observer = listeners.get(i);
            observer.update(this.{ctx.field});
        }}
    }}

    public void setState(int next) {{
        this.{ctx.field} = next;
        notifyObservers();
    }}
}}

interface {c}Listener {{
    void update(int state);
}}
"""


def _adapter(ctx: _Ctx) -> str:
    c = ctx.cls
    return f"""interface {c}Target {{
    String request(int amount);
}}

public class {c}Adapter implements {c}Target {{
    private {c}Legacy adaptee;

    public {c}Adapter({c}Legacy adaptee) {{
        this.adaptee = adaptee;
    }}

    public String request(int amount) {{
        return adaptee.specificRequest(amount);
    }}
}}

class {c}Legacy {{
    public String specificRequest(int amount) {{
        return "legacy" + amount;
    }}
}}
"""


def _builder(ctx: _Ctx) -> str:
    c = ctx.cls
    f1, f2 = ctx.field, "extra"
    return f"""public class {c}Builder {{
    private int {f1};
    private String {f2};

    public {c}Builder with{c}(int {f1}) {{
        this.{f1} = {f1};
        return this;
    }}

    public {c}Builder withLabel(String label) {{
        this.{f2} = label;
        return this;
    }}

    public {c} build() {{
        {c} product = new {c}(this.{f1}, this.{f2});
        return product;
    }}
}}

class {c} {{
    private int {f1};
    private String {f2};

    {c}(int {f1}, String {f2}) {{
        this.{f1} = {f1};
        this.{f2} = {f2};
    }}
}}
"""


def _decorator(ctx: _Ctx) -> str:
    c = ctx.cls
    return f"""interface {c}Component {{
    int operation(int input);
}}

public class {c}Decorator implements {c}Component {{
    private {c}Component wrapped;

    public {c}Decorator({c}Component wrapped) {{
        this.wrapped = wrapped;
    }}

    public int operation(int input) {{
        int base = wrapped.operation(input);
        return decorate(base);
    }}

    private int decorate(int base) {{
        return base + 1;
    }}
}}
"""


def _facade(ctx: _Ctx) -> str:
    c = ctx.cls
    return f"""public class {c}Facade {{
    private {c}Loader loader;
    private {c}Checker checker;

    public int openAll(String name) {{
        int handle = loader.load(name);
        boolean ok = checker.verify(handle);
        if (ok) {{
            return handle;
        }}
        return 0;
    }}
}}

class {c}Loader {{
    public int load(String name) {{
        return name.length();
    }}
}}

class {c}Checker {{
    public boolean verify(int handle) {{
        return handle > 0;
    }}
}}
"""


def _factory(ctx: _Ctx) -> str:
    c = ctx.cls
    return f"""public class {c}Factory {{
    public {c}Product createProduct(int kind) {{
        if (kind == 0) {{
            return new Basic{c}();
        }}
        return new Fancy{c}();
    }}
}}

interface {c}Product {{
    int cost();
}}

class Basic{c} implements {c}Product {{
    public int cost() {{
        return 1;
    }}
}}

class Fancy{c} implements {c}Product {{
    public int cost() {{
        return 2;
    }}
}}
"""


def _memento(ctx: _Ctx) -> str:
    c = ctx.cls
    return f"""public class {c}Originator {{
    private int {ctx.field};

    public {c}Memento saveState() {{
        {c}Memento snapshot = new {c}Memento(this.{ctx.field});
        return snapshot;
    }}

    public void restore({c}Memento memento) {{
        this.{ctx.field} = memento.getSaved();
    }}
}}

class {c}Memento {{
    private int saved;

    {c}Memento(int saved) {{
        this.saved = saved;
    }}

    public int getSaved() {{
        return saved;
    }}
}}
"""


def _prototype(ctx: _Ctx) -> str:
    c = ctx.cls
    return f"""public class {c} {{
    private int {ctx.field};
    private String tag;

    public {c} clonePrototype() {{
        {c} copy = new {c}();
        copy.{ctx.field} = this.{ctx.field};
        copy.tag = this.tag;
        return copy;
    }}

{_filler(ctx, 1)}}}
"""


def _proxy(ctx: _Ctx) -> str:
    c = ctx.cls
    return f"""interface {c}Service {{
    int fetch(int key);
}}

public class {c}Proxy implements {c}Service {{
    private Real{c} realSubject;
    private boolean allowed;

    public int fetch(int key) {{
        if (!allowed) {{
            return 0;
        }}
        if (realSubject == null) {{
            realSubject = new Real{c}();
        }}
        return realSubject.fetch(key);
    }}
}}

class Real{c} implements {c}Service {{
    public int fetch(int key) {{
        return key * 2;
    }}
}}
"""


def _visitor(ctx: _Ctx) -> str:
    c = ctx.cls
    return f"""interface {c}Visitor {{
    void visitLeaf({c}Leaf leaf);
    void visitGroup({c}Group group);
}}

public class {c}Leaf {{
    public void accept({c}Visitor visitor) {{
        visitor.visitLeaf(this);
    }}
}}

class {c}Group {{
    public void accept({c}Visitor visitor) {{
        visitor.visitGroup(this);
    }}
}}
"""


def _wrapper(ctx: _Ctx) -> str:
    c = ctx.cls
    return f"""public class {c}Wrapper {{
    private ExternalLib{c} inner;

    public {c}Wrapper() {{
        this.inner = new ExternalLib{c}();
    }}

    public int simpleCall(int arg) {{
        inner.prepare();
        return inner.complicatedCall(arg, 0, true);
    }}
}}

class ExternalLib{c} {{
    public void prepare() {{
        return;
    }}

    public int complicatedCall(int a, int b, boolean flag) {{
        return a + b;
    }}
}}
"""


def _none(ctx: _Ctx) -> str:
    c = ctx.cls
    return f"""public class {c}Util {{
    private int {ctx.field};

    public int add(int a, int b) {{
        int total = a + b;
        return total;
    }}

    public int scale(int a) {{
        this.{ctx.field} = a;
        return a * 3;
    }}

{_filler(ctx, 2)}}}
"""


_TEMPLATES = {
    PatternLabel.SINGLETON: (_singleton, ""),
    PatternLabel.OBSERVER: (_observer, "Subject"),
    PatternLabel.ADAPTER: (_adapter, "Adapter"),
    PatternLabel.BUILDER: (_builder, "Builder"),
    PatternLabel.DECORATOR: (_decorator, "Decorator"),
    PatternLabel.FACADE: (_facade, "Facade"),
    PatternLabel.FACTORY: (_factory, "Factory"),
    PatternLabel.MEMENTO: (_memento, "Originator"),
    PatternLabel.PROTOTYPE: (_prototype, ""),
    PatternLabel.PROXY: (_proxy, "Proxy"),
    PatternLabel.VISITOR: (_visitor, "Leaf"),
    PatternLabel.WRAPPER: (_wrapper, "Wrapper"),
    PatternLabel.NONE: (_none, "Util"),
}


def generate_synthetic_corpus(
    spec: dict[PatternLabel, int], seed: int
) -> tuple[CorpusManifest, list[LabelledInstance]]:
    """Emit templated Java files matching each pattern's defining shape.

    Deterministic for a fixed seed; one project directory per pattern.
    """
    rng = random.Random(seed)
    files: list[SourceFile] = []
    instances: list[LabelledInstance] = []
    for label in LABEL_ORDER:
        count = spec.get(label, 0)
        if count < 0:
            raise ValueError(f"negative count for {label.value}")
        if count == 0:
            continue
        template, suffix = _TEMPLATES[label]
        project = label.value.lower()
        for i in range(count):
            ctx = _Ctx(
                noun=rng.choice(_NOUNS),
                field=rng.choice(_FIELD_WORDS),
                index=i,
                rng=rng,
            )
            content = template(ctx)
            source = SourceFile(
                project_id=project,
                relative_path=f"{ctx.cls}{suffix or 'Main'}.java",
                content=content,
            )
            files.append(source)
            instances.append(
                LabelledInstance(source=source, class_name=f"{ctx.cls}{suffix}", label=label)
            )
    files.sort(key=lambda f: (f.project_id, f.relative_path))
    order = {f.full_path: i for i, f in enumerate(files)}
    instances.sort(key=lambda inst: order[inst.source.full_path])
    manifest = CorpusManifest(files=tuple(files), excluded=())
    return manifest, instances
