"""SSLR emission: a line-oriented text rendering of features and calls.

Format contract (versioned, load-bearing):

* one sentence per line, tokens separated by single spaces;
* per-file blocks introduced by ``## file <project_id>/<path>``;
* one class sentence per class::

      class <name> <modifiers> [extends <name>] [implements <names>]

* one method sentence per method::

      method <name> returns <type> params <param names>
             [calls <other-class callee names>] [calledby <caller names>]
             <statement-kind tokens>

All names pass through split_identifier; the only literal tokens are
the eight keywords plus the statement-kind words, every one of which is
itself a valid split token ([a-z]+).
"""
from __future__ import annotations

import re
import unicodedata
from dataclasses import dataclass
from pathlib import Path

from .features import FileFeatures
from .javaparser import StatementKind

KEYWORDS = frozenset(
    {"class", "method", "extends", "implements", "returns", "params", "calls", "calledby"}
)

# fixed rendering order for modifier and statement-kind tokens
_MODIFIER_ORDER = ("public", "protected", "private", "default", "abstract", "static", "final")
_KIND_TOKENS = {
    StatementKind.ASSIGNMENT: "assignment",
    StatementKind.LOCAL_DECLARATION: "declaration",
    StatementKind.CONDITIONAL: "conditional",
    StatementKind.LOOP: "loop",
    StatementKind.RETURN: "return",
    StatementKind.INVOCATION: "invocation",
    StatementKind.OTHER: "other",
}
_WORD_RE = re.compile(r"[A-Z]+(?![a-z])|[A-Z][a-z]*|[a-z]+")
TOKEN_RE = re.compile(r"[a-z]+\Z")


@dataclass(frozen=True)
class SslrDocument:
    source: str  # project_id/path of the originating file
    sentences: tuple[tuple[str, ...], ...]

    def tokens(self) -> list[str]:
        return [tok for sentence in self.sentences for tok in sentence]


def split_identifier(identifier: str) -> list[str]:
    """Lowercased word tokens of an identifier.

    Splits on camelCase boundaries, underscores and any non-alphabetic
    character; consecutive capitals form one acronym token; digit runs
    are dropped.  Returns [] when nothing alphabetic remains.
    """
    if not identifier:
        return []
    ascii_form = (
        unicodedata.normalize("NFKD", identifier).encode("ascii", "ignore").decode("ascii")
    )
    return [m.group(0).lower() for m in _WORD_RE.finditer(ascii_form)]


def _kind_tokens(body_line_types: tuple[tuple[str, int], ...]) -> list[str]:
    counts = dict(body_line_types)
    out: list[str] = []
    for kind in StatementKind:
        out.extend([_KIND_TOKENS[kind]] * counts.get(kind.value, 0))
    return out


def _apply_ngrams(tokens: list[str], ngram: int) -> list[str]:
    if ngram <= 1 or len(tokens) < 2:
        return tokens
    joined = [a + b for a, b in zip(tokens, tokens[1:])]
    return tokens + joined


def emit_sslr(features: FileFeatures, ngram: int = 1) -> SslrDocument:
    """Render one file's feature records as an SSLR document.

    ``ngram=2`` additionally appends window-joined bigram tokens to each
    sentence (off by default).
    """
    sentences: list[tuple[str, ...]] = []
    for entry in features.entries:
        model, record = entry.model, entry.record
        sent = ["class"] + split_identifier(record.class_name)
        for modifier in _MODIFIER_ORDER:
            if modifier in record.class_modifiers:
                sent.append(modifier)
        if model.extends_name:
            sent.append("extends")
            sent.extend(split_identifier(model.extends_name))
        if model.implements_names:
            sent.append("implements")
            for iface in model.implements_names:
                sent.extend(split_identifier(iface))
        sentences.append(tuple(_apply_ngrams(sent, ngram)))

        for _method, mrec in entry.methods:
            sent = ["method"] + split_identifier(mrec.method_name)
            sent.append("returns")
            sent.extend(split_identifier(mrec.return_type))
            sent.append("params")
            for pname, _ptype in mrec.method_params:
                sent.extend(split_identifier(pname))
            if mrec.incoming_method_count:
                sent.append("calls")
                for name in mrec.incoming_names:
                    sent.extend(split_identifier(name))
            if mrec.outgoing_method_count:
                sent.append("calledby")
                for name in mrec.outgoing_names:
                    sent.extend(split_identifier(name))
            sent.extend(_kind_tokens(mrec.body_line_types))
            sentences.append(tuple(_apply_ngrams(sent, ngram)))
    return SslrDocument(source=features.source.full_path, sentences=tuple(sentences))


FILE_HEADER_PREFIX = "## file "


def render_sslr(documents: list[SslrDocument]) -> str:
    lines: list[str] = []
    for doc in documents:
        lines.append(FILE_HEADER_PREFIX + doc.source)
        for sentence in doc.sentences:
            lines.append(" ".join(sentence))
    return "\n".join(lines) + "\n"


def write_sslr_file(documents: list[SslrDocument], path: str | Path) -> None:
    Path(path).write_text(render_sslr(documents), encoding="utf-8")


def parse_sslr_text(text: str) -> list[SslrDocument]:
    documents: list[SslrDocument] = []
    current: str | None = None
    sentences: list[tuple[str, ...]] = []
    for line in text.splitlines():
        if line.startswith(FILE_HEADER_PREFIX):
            if current is not None:
                documents.append(SslrDocument(source=current, sentences=tuple(sentences)))
            current = line[len(FILE_HEADER_PREFIX):]
            sentences = []
        elif line.strip():
            if current is None:
                raise ValueError("SSLR content before any file header")
            sentences.append(tuple(line.split()))
    if current is not None:
        documents.append(SslrDocument(source=current, sentences=tuple(sentences)))
    return documents


def read_sslr_file(path: str | Path) -> list[SslrDocument]:
    return parse_sslr_text(Path(path).read_text(encoding="utf-8"))
