"""Structural parser for a Java-7 subset.

Produces ClassModel/MethodModel records sufficient for feature
extraction and call-graph construction.  Generics are parsed but erased
to raw names, annotations are skipped, lambdas and method references
are rejected (pre-Java-8 corpus).  Constructs outside the subset
degrade to statements of kind "other" instead of failing the file.

Statement-level decisions (kept stable because features depend on them):

* statements nested in blocks/branches are recorded flattened;
* a declaration statement counts once regardless of how many variables
  it introduces; for-init, for-each, catch and try-resource declarations
  enter the receiver scope but are not counted as declaration statements;
* ``i++;`` style mutations classify as assignment;
* object creation (``new``) is not a call site, so default constructors
  never produce dangling edges;
* anonymous class bodies contribute their statements and call sites to
  the enclosing method.
"""
from __future__ import annotations

import enum
import json
import logging
from dataclasses import dataclass, field

from .corpus import CorpusManifest, SourceFile
from .errors import JavaSyntaxError

logger = logging.getLogger(__name__)


class StatementKind(enum.Enum):
    ASSIGNMENT = "assignment"
    LOCAL_DECLARATION = "local-declaration"
    CONDITIONAL = "conditional"
    LOOP = "loop"
    RETURN = "return"
    INVOCATION = "invocation"
    OTHER = "other"


@dataclass(frozen=True)
class StatementInfo:
    kind: StatementKind


class ReceiverKind(enum.Enum):
    THIS_OR_IMPLICIT = "this"
    VARIABLE = "variable"
    TYPE_NAME = "type"
    UNKNOWN = "unknown"


@dataclass(frozen=True)
class CallSite:
    """One call expression: receiver classification plus callee/arity."""

    receiver_kind: ReceiverKind
    receiver_type: str | None  # declared type for VARIABLE, class name for TYPE_NAME
    callee_name: str
    argument_count: int


@dataclass
class MethodModel:
    name: str
    modifiers: set[str]
    parameters: list[tuple[str, str]]  # (name, erased type)
    return_type: str  # type name, "void" or "constructor"
    statements: list[StatementInfo] = field(default_factory=list)
    local_variable_count: int = 0
    call_sites: list[CallSite] = field(default_factory=list)
    line_count: int = 0


@dataclass
class ClassModel:
    name: str
    kind: str  # class | interface | enum
    modifiers: set[str]
    extends_name: str | None = None
    implements_names: list[str] = field(default_factory=list)
    methods: list[MethodModel] = field(default_factory=list)
    field_names_and_types: list[tuple[str, str]] = field(default_factory=list)


@dataclass
class CodeModel:
    """Parsed corpus: class models per file plus per-file diagnostics."""

    manifest: CorpusManifest
    classes_by_file: dict[str, list[ClassModel]]
    diagnostics: list[tuple[str, str]]

    def all_classes(self) -> list[ClassModel]:
        out: list[ClassModel] = []
        for models in self.classes_by_file.values():
            out.extend(models)
        return out


# ---------------------------------------------------------------------------
# Lexer
# ---------------------------------------------------------------------------

WORD = "w"
NUMBER = "n"
STRING = "s"
PUNCT = "p"

_MULTI_OPS = [
    ">>>=", "<<=", ">>=", ">>>", "...", "->", "::", "==", "!=", "<=", ">=",
    "&&", "||", "++", "--", "+=", "-=", "*=", "/=", "%=", "&=", "|=", "^=",
    "<<", ">>",
]

MODIFIER_WORDS = {"public", "protected", "private", "abstract", "static", "final"}
_SKIPPED_MODIFIERS = {"strictfp", "native", "synchronized", "transient", "volatile", "default"}
_PRIMITIVES = {"void", "boolean", "byte", "char", "short", "int", "long", "float", "double"}
_RESERVED = {
    "abstract", "assert", "boolean", "break", "byte", "case", "catch", "char",
    "class", "const", "continue", "default", "do", "double", "else", "enum",
    "extends", "final", "finally", "float", "for", "goto", "if", "implements",
    "import", "instanceof", "int", "interface", "long", "native", "new",
    "package", "private", "protected", "public", "return", "short", "static",
    "strictfp", "super", "switch", "synchronized", "this", "throw", "throws",
    "transient", "try", "void", "volatile", "while", "true", "false", "null",
}


@dataclass(frozen=True)
class Token:
    kind: str
    text: str
    line: int
    col: int


def tokenize(text: str) -> list[Token]:
    tokens: list[Token] = []
    i, n = 0, len(text)
    line, col = 1, 1

    def advance(count: int):
        nonlocal i, line, col
        for _ in range(count):
            if text[i] == "\n":
                line += 1
                col = 1
            else:
                col += 1
            i += 1

    while i < n:
        ch = text[i]
        if ch in " \t\r\n\f":
            advance(1)
            continue
        if ch == "/" and i + 1 < n:
            if text[i + 1] == "/":
                while i < n and text[i] != "\n":
                    advance(1)
                continue
            if text[i + 1] == "*":
                start_line, start_col = line, col
                advance(2)
                while i + 1 < n and not (text[i] == "*" and text[i + 1] == "/"):
                    advance(1)
                if i + 1 >= n:
                    raise JavaSyntaxError("unterminated block comment", start_line, start_col)
                advance(2)
                continue
        if ch.isalpha() or ch == "_" or ch == "$":
            start, sl, sc = i, line, col
            while i < n and (text[i].isalnum() or text[i] in "_$"):
                advance(1)
            tokens.append(Token(WORD, text[start:i], sl, sc))
            continue
        if ch.isdigit():
            start, sl, sc = i, line, col
            while i < n and (text[i].isalnum() or text[i] in "._"):
                if text[i] in "eE" and i + 1 < n and text[i + 1] in "+-" and not text[start:i].startswith("0x"):
                    advance(2)
                    continue
                advance(1)
            tokens.append(Token(NUMBER, text[start:i], sl, sc))
            continue
        if ch in "\"'":
            quote, sl, sc = ch, line, col
            advance(1)
            buf = []
            while i < n and text[i] != quote:
                if text[i] == "\\" and i + 1 < n:
                    buf.append(text[i : i + 2])
                    advance(2)
                elif text[i] == "\n":
                    raise JavaSyntaxError("unterminated literal", sl, sc)
                else:
                    buf.append(text[i])
                    advance(1)
            if i >= n:
                raise JavaSyntaxError("unterminated literal", sl, sc)
            advance(1)
            tokens.append(Token(STRING, "".join(buf), sl, sc))
            continue
        matched = None
        for op in _MULTI_OPS:
            if text.startswith(op, i):
                matched = op
                break
        sl, sc = line, col
        if matched:
            advance(len(matched))
            tokens.append(Token(PUNCT, matched, sl, sc))
        else:
            advance(1)
            tokens.append(Token(PUNCT, ch, sl, sc))
    return tokens


# ---------------------------------------------------------------------------
# Parser
# ---------------------------------------------------------------------------

_OPEN_FOR = {")": "(", "]": "[", "}": "{"}


class _Parser:
    def __init__(self, tokens: list[Token]):
        self.toks = tokens
        self.i = 0
        self.models: list[ClassModel] = []

    # -- token helpers ------------------------------------------------------

    def peek(self, offset: int = 0) -> Token | None:
        j = self.i + offset
        return self.toks[j] if j < len(self.toks) else None

    def at(self, text: str, offset: int = 0) -> bool:
        t = self.peek(offset)
        return t is not None and t.text == text

    def at_word(self, offset: int = 0) -> bool:
        t = self.peek(offset)
        return t is not None and t.kind == WORD

    def take(self) -> Token:
        t = self.peek()
        if t is None:
            last = self.toks[-1] if self.toks else Token(PUNCT, "", 1, 1)
            raise JavaSyntaxError("unexpected end of file", last.line, last.col)
        self.i += 1
        return t

    def expect(self, text: str) -> Token:
        t = self.take()
        if t.text != text:
            raise JavaSyntaxError(f"expected {text!r}, found {t.text!r}", t.line, t.col)
        return t

    def error(self, message: str) -> JavaSyntaxError:
        t = self.peek() or self.toks[-1]
        return JavaSyntaxError(message, t.line, t.col)

    def skip_balanced(self, opener: str) -> int:
        """Consume from the current opener token to its match; return close index."""
        open_tok = self.take()
        assert open_tok.text == opener
        closer = {"(": ")", "[": "]", "{": "}", "<": ">"}[opener]
        depth = 1
        while depth:
            t = self.peek()
            if t is None:
                raise JavaSyntaxError(f"unbalanced {opener!r}", open_tok.line, open_tok.col)
            self.i += 1
            if t.text == opener:
                depth += 1
            elif t.text == closer:
                depth -= 1
            elif opener == "<" and t.text in (";", "{"):
                raise JavaSyntaxError("unbalanced generic arguments", open_tok.line, open_tok.col)
            elif opener == "<" and t.text == ">>":
                depth -= 2
            elif opener == "<" and t.text == ">>>":
                depth -= 3
        return self.i - 1

    def skip_annotation(self):
        self.expect("@")
        if not self.at_word():
            raise self.error("annotation name expected")
        self.take()
        while self.at("."):
            self.take()
            self.take()
        if self.at("("):
            self.skip_balanced("(")

    # -- types ---------------------------------------------------------------

    def try_parse_type(self) -> str | None:
        """Parse a type reference, returning the erased simple name.

        Leaves the cursor after the type (including generics and array
        brackets); returns None and restores position when the tokens do
        not form a type.
        """
        start = self.i
        t = self.peek()
        if t is None or t.kind != WORD:
            return None
        if t.text in _PRIMITIVES:
            self.take()
            name = t.text
        elif t.text in _RESERVED:
            return None
        else:
            self.take()
            name = t.text
            while self.at(".") and self.at_word(1) and self.peek(1).text not in _RESERVED:
                self.take()
                name = self.take().text
            if self.at("<"):
                try:
                    self.skip_balanced("<")
                except JavaSyntaxError:
                    self.i = start
                    return None
        while self.at("[") and self.at("]", 1):
            self.take()
            self.take()
        return name

    # -- top level -----------------------------------------------------------

    def parse_compilation_unit(self) -> list[ClassModel]:
        while self.peek() is not None:
            if self.at("package") or self.at("import"):
                while not self.at(";"):
                    self.take()
                self.take()
                continue
            if self.at("@") and self.at("interface", 1):
                self.take()
                self.take()
                self.take()  # name
                while not self.at("{"):
                    self.take()
                self.skip_balanced("{")
                continue
            if self.at("@"):
                self.skip_annotation()
                continue
            if self.at(";"):
                self.take()
                continue
            self.parse_type_declaration(outer=None)
        return self.models

    def parse_type_declaration(self, outer: str | None) -> ClassModel:
        modifiers: set[str] = set()
        while True:
            if self.at("@"):
                self.skip_annotation()
                continue
            t = self.peek()
            if t is None:
                raise self.error("type declaration expected")
            if t.kind == WORD and t.text in MODIFIER_WORDS:
                modifiers.add(self.take().text)
                continue
            if t.kind == WORD and t.text in _SKIPPED_MODIFIERS:
                self.take()
                continue
            break
        t = self.take()
        if t.text not in ("class", "interface", "enum"):
            raise JavaSyntaxError(f"expected type declaration, found {t.text!r}", t.line, t.col)
        kind = t.text
        name_tok = self.take()
        if name_tok.kind != WORD:
            raise JavaSyntaxError("type name expected", name_tok.line, name_tok.col)
        if not (modifiers & {"public", "protected", "private"}):
            modifiers.add("default")
        full_name = f"{outer}.{name_tok.text}" if outer else name_tok.text
        model = ClassModel(name=full_name, kind=kind, modifiers=modifiers)

        if self.at("<"):
            self.skip_balanced("<")
        if self.at("extends"):
            self.take()
            supers = [self._required_type("extends target")]
            while kind == "interface" and self.at(","):
                self.take()
                supers.append(self._required_type("extends target"))
            model.extends_name = supers[0]
            for extra in supers[1:]:
                if extra not in model.implements_names:
                    model.implements_names.append(extra)
        if self.at("implements"):
            self.take()
            while True:
                iface = self._required_type("implements target")
                if iface not in model.implements_names:
                    model.implements_names.append(iface)
                if self.at(","):
                    self.take()
                    continue
                break
        self.expect("{")
        self.models.append(model)
        if kind == "enum":
            self._parse_enum_constants()
        self._parse_members(model)
        return model

    def _required_type(self, what: str) -> str:
        name = self.try_parse_type()
        if name is None:
            raise self.error(f"{what} expected")
        return name

    def _parse_enum_constants(self):
        while True:
            if self.at(";"):
                self.take()
                return
            if self.at("}"):
                return
            if self.at("@"):
                self.skip_annotation()
                continue
            if not self.at_word():
                raise self.error("enum constant expected")
            self.take()
            if self.at("("):
                self.skip_balanced("(")
            if self.at("{"):
                self.skip_balanced("{")
            if self.at(","):
                self.take()

    # -- members ---------------------------------------------------------------

    def _parse_members(self, model: ClassModel):
        while True:
            if self.at("}"):
                self.take()
                return
            if self.peek() is None:
                raise self.error("unbalanced class body")
            if self.at(";"):
                self.take()
                continue
            if self.at("@") and not self.at("interface", 1):
                self.skip_annotation()
                continue
            if self.at("{"):  # instance initializer
                self.skip_balanced("{")
                continue

            start = self.i
            modifiers: set[str] = set()
            while True:
                if self.at("@"):
                    self.skip_annotation()
                    continue
                t = self.peek()
                if t is not None and t.kind == WORD and t.text in MODIFIER_WORDS:
                    modifiers.add(self.take().text)
                    continue
                if t is not None and t.kind == WORD and t.text in _SKIPPED_MODIFIERS:
                    self.take()
                    continue
                break

            if self.at("{"):  # static initializer
                self.skip_balanced("{")
                continue
            if self.at("class") or self.at("interface") or self.at("enum"):
                self.i = start
                nested_modifiers_rescan = self.parse_type_declaration(outer=model.name)
                del nested_modifiers_rescan
                continue
            if self.at("<"):  # generic method
                self.skip_balanced("<")

            simple_name = model.name.rsplit(".", 1)[-1]
            if self.at(simple_name) and self.at("(", 1):
                ctor_tok = self.take()
                method = MethodModel(
                    name=ctor_tok.text,
                    modifiers=self._member_modifiers(modifiers),
                    parameters=self._parse_parameters(),
                    return_type="constructor",
                )
                self._finish_method(method, model)
                continue

            type_name = self.try_parse_type()
            if type_name is None:
                raise self.error("member declaration expected")
            if not self.at_word():
                raise self.error("member name expected")
            name_tok = self.take()
            if self.at("("):
                method = MethodModel(
                    name=name_tok.text,
                    modifiers=self._member_modifiers(modifiers),
                    parameters=self._parse_parameters(),
                    return_type=type_name,
                )
                self._finish_method(method, model)
            else:
                self._parse_field_tail(model, type_name, name_tok)

    def _member_modifiers(self, modifiers: set[str]) -> set[str]:
        out = set(modifiers)
        if not (out & {"public", "protected", "private"}):
            out.add("default")
        return out

    def _parse_parameters(self) -> list[tuple[str, str]]:
        self.expect("(")
        params: list[tuple[str, str]] = []
        while not self.at(")"):
            while self.at("@"):
                self.skip_annotation()
            if self.at("final"):
                self.take()
            ptype = self.try_parse_type()
            if ptype is None:
                raise self.error("parameter type expected")
            if self.at("..."):
                self.take()
            if not self.at_word():
                raise self.error("parameter name expected")
            pname = self.take().text
            while self.at("[") and self.at("]", 1):
                self.take()
                self.take()
            params.append((pname, ptype))
            if self.at(","):
                self.take()
        self.expect(")")
        return params

    def _parse_field_tail(self, model: ClassModel, type_name: str, first_name: Token):
        names = [first_name.text]
        while self.at("[") and self.at("]", 1):
            self.take()
            self.take()
        while True:
            if self.at("="):
                self.take()
                self._consume_expression(stop={",", ";"})
            if self.at(","):
                self.take()
                if not self.at_word():
                    raise self.error("field name expected")
                names.append(self.take().text)
                while self.at("[") and self.at("]", 1):
                    self.take()
                    self.take()
                continue
            self.expect(";")
            break
        for n in names:
            model.field_names_and_types.append((n, type_name))

    def _consume_expression(self, stop: set[str]):
        """Skip an expression up to (not including) a top-level stop token."""
        depth = 0
        while True:
            t = self.peek()
            if t is None:
                raise self.error("unterminated expression")
            if t.text in ("->", "::"):
                raise JavaSyntaxError("Java 8 syntax not supported", t.line, t.col)
            if depth == 0 and t.text in stop:
                return
            if t.text in ("(", "[", "{"):
                depth += 1
            elif t.text in (")", "]", "}"):
                if depth == 0:
                    raise JavaSyntaxError("unbalanced expression", t.line, t.col)
                depth -= 1
            self.take()

    def _finish_method(self, method: MethodModel, model: ClassModel):
        if self.at("throws"):
            self.take()
            self._required_type("throws target")
            while self.at(","):
                self.take()
                self._required_type("throws target")
        if self.at(";"):
            self.take()
            model.methods.append(method)
            return
        if not self.at("{"):
            raise self.error("method body expected")
        open_tok = self.peek()
        body_start = self.i + 1
        body_end = self.skip_balanced("{")  # index of the closing brace
        close_tok = self.toks[body_end]
        method.line_count = max(0, close_tok.line - open_tok.line - 1)
        scanner = _BodyScanner(self.toks, model, method)
        scanner.run(body_start, body_end)
        model.methods.append(method)


# ---------------------------------------------------------------------------
# Method body scanning
# ---------------------------------------------------------------------------

_NOT_CALLEES = {
    "if", "for", "while", "switch", "catch", "synchronized", "return",
    "assert", "new", "super", "this", "throw", "instanceof",
}

_ASSIGN_OPS = {"=", "+=", "-=", "*=", "/=", "%=", "&=", "|=", "^=", "<<=", ">>=", ">>>="}


class _BodyScanner:
    """Statement classification and call-site extraction over a body span."""

    def __init__(self, tokens: list[Token], model: ClassModel, method: MethodModel):
        self.toks = tokens
        self.model = model
        self.method = method
        self.scope: dict[str, str] = {name: tname for name, tname in method.parameters}
        self.fields: dict[str, str] = dict(model.field_names_and_types)

    def run(self, start: int, end: int):
        self._scan_statements(start, end)
        self._scan_call_sites(start, end)

    # -- statements -----------------------------------------------------------

    def _scan_statements(self, i: int, end: int):
        while i < end:
            i = self._scan_statement(i, end)

    def _add(self, kind: StatementKind):
        self.method.statements.append(StatementInfo(kind))

    def _match(self, i: int, end: int, opener: str) -> int:
        """Index just past the group opened at i (tokens[i] must be opener)."""
        closer = {"(": ")", "[": "]", "{": "}"}[opener]
        depth = 0
        j = i
        while j < end:
            text = self.toks[j].text
            if text == opener:
                depth += 1
            elif text == closer:
                depth -= 1
                if depth == 0:
                    return j + 1
            j += 1
        t = self.toks[i]
        raise JavaSyntaxError(f"unbalanced {opener!r}", t.line, t.col)

    def _seek_semicolon(self, i: int, end: int) -> int:
        """Index just past the next top-level ';', consuming nested groups.

        Anonymous class bodies inside the consumed span are folded: their
        member bodies are statement-scanned into the enclosing method.
        """
        depth = 0
        j = i
        past = -1
        while j < end:
            text = self.toks[j].text
            if text in ("->", "::"):
                t = self.toks[j]
                raise JavaSyntaxError("Java 8 syntax not supported", t.line, t.col)
            if text in ("(", "[", "{"):
                depth += 1
            elif text in (")", "]", "}"):
                depth -= 1
            elif text == ";" and depth == 0:
                past = j + 1
                break
            j += 1
        if past < 0:
            t = self.toks[min(i, len(self.toks) - 1)]
            raise JavaSyntaxError("missing ';'", t.line, t.col)
        self._fold_anonymous_bodies(i, past)
        return past

    def _fold_anonymous_bodies(self, i: int, past: int):
        j = i
        while j < past:
            if self.toks[j].text != "new":
                j += 1
                continue
            k = j + 1
            while k < past and (self.toks[k].kind == WORD or self.toks[k].text == "."):
                k += 1
            if k < past and self.toks[k].text == "<":
                depth = 1
                k += 1
                while k < past and depth > 0:
                    w = self.toks[k].text
                    if w == "<":
                        depth += 1
                    elif w == ">":
                        depth -= 1
                    elif w == ">>":
                        depth -= 2
                    elif w == ">>>":
                        depth -= 3
                    k += 1
            if k < past and self.toks[k].text == "(":
                k = self._match(k, past, "(")
                if k < past and self.toks[k].text == "{":
                    body_past = self._match(k, past, "{")
                    self._scan_anonymous_members(k + 1, body_past - 1)
                    j = body_past
                    continue
            j = k if k > j else j + 1

    def _scan_anonymous_members(self, i: int, end: int):
        """Statement-scan method bodies of an anonymous class declaration."""
        j = i
        while j < end:
            text = self.toks[j].text
            if text == "(":
                header_past = self._match(j, end, "(")
                k = header_past
                if k < end and self.toks[k].text == "throws":
                    while k < end and self.toks[k].text != "{" and self.toks[k].text != ";":
                        k += 1
                if k < end and self.toks[k].text == "{":
                    body_past = self._match(k, end, "{")
                    self._scan_statements(k + 1, body_past - 1)
                    j = body_past
                    continue
                j = header_past
                continue
            if text == "{":  # initializer or array literal: skip wholesale
                j = self._match(j, end, "{")
                continue
            j += 1

    def _scan_statement(self, i: int, end: int) -> int:
        t = self.toks[i]
        text = t.text

        if text == ";":
            return i + 1
        if text == "{":
            inner_end = self._match(i, end, "{") - 1
            self._scan_statements(i + 1, inner_end)
            return inner_end + 1
        if text in ("->", "::"):
            raise JavaSyntaxError("Java 8 syntax not supported", t.line, t.col)

        if t.kind == WORD:
            handler = getattr(self, f"_stmt_{text}", None)
            if handler is not None:
                return handler(i, end)
            # label: `name:` followed by a statement
            if (
                i + 1 < end
                and self.toks[i + 1].text == ":"
                and text not in _RESERVED
            ):
                return i + 2

        decl = self._try_declaration(i, end)
        if decl is not None:
            return decl
        return self._expression_statement(i, end)

    # individual keywords -------------------------------------------------

    def _stmt_if(self, i: int, end: int) -> int:
        self._add(StatementKind.CONDITIONAL)
        j = self._match(i + 1, end, "(")
        j = self._scan_statement(j, end)
        if j < end and self.toks[j].text == "else":
            j = self._scan_statement(j + 1, end)
        return j

    def _stmt_switch(self, i: int, end: int) -> int:
        self._add(StatementKind.CONDITIONAL)
        j = self._match(i + 1, end, "(")
        body_past = self._match(j, end, "{")
        k = j + 1
        while k < body_past - 1:
            text = self.toks[k].text
            if text == "case":
                depth = 0
                while k < body_past - 1:
                    w = self.toks[k].text
                    if w in ("(", "["):
                        depth += 1
                    elif w in (")", "]"):
                        depth -= 1
                    elif w == ":" and depth == 0:
                        break
                    k += 1
                k += 1
                continue
            if text == "default" and k + 1 < body_past and self.toks[k + 1].text == ":":
                k += 2
                continue
            k = self._scan_statement(k, body_past - 1)
        return body_past

    def _stmt_for(self, i: int, end: int) -> int:
        self._add(StatementKind.LOOP)
        header_past = self._match(i + 1, end, "(")
        self._register_header_declaration(i + 2, header_past - 1)
        return self._scan_statement(header_past, end)

    def _stmt_while(self, i: int, end: int) -> int:
        self._add(StatementKind.LOOP)
        j = self._match(i + 1, end, "(")
        return self._scan_statement(j, end)

    def _stmt_do(self, i: int, end: int) -> int:
        self._add(StatementKind.LOOP)
        j = self._scan_statement(i + 1, end)
        if j < end and self.toks[j].text == "while":
            j = self._match(j + 1, end, "(")
            if j < end and self.toks[j].text == ";":
                j += 1
        return j

    def _stmt_return(self, i: int, end: int) -> int:
        self._add(StatementKind.RETURN)
        return self._seek_semicolon(i, end)

    def _stmt_try(self, i: int, end: int) -> int:
        self._add(StatementKind.OTHER)
        j = i + 1
        if j < end and self.toks[j].text == "(":
            header_past = self._match(j, end, "(")
            self._register_header_declaration(j + 1, header_past - 1)
            j = header_past
        inner_end = self._match(j, end, "{") - 1
        self._scan_statements(j + 1, inner_end)
        j = inner_end + 1
        while j < end and self.toks[j].text in ("catch", "finally"):
            if self.toks[j].text == "catch":
                header_past = self._match(j + 1, end, "(")
                self._register_catch_parameter(j + 2, header_past - 1)
                j = header_past
            else:
                j += 1
            inner_end = self._match(j, end, "{") - 1
            self._scan_statements(j + 1, inner_end)
            j = inner_end + 1
        return j

    def _stmt_synchronized(self, i: int, end: int) -> int:
        self._add(StatementKind.OTHER)
        j = i + 1
        if j < end and self.toks[j].text == "(":
            j = self._match(j, end, "(")
        return self._scan_statement(j, end)

    def _stmt_throw(self, i: int, end: int) -> int:
        self._add(StatementKind.OTHER)
        return self._seek_semicolon(i, end)

    def _stmt_break(self, i: int, end: int) -> int:
        self._add(StatementKind.OTHER)
        return self._seek_semicolon(i, end)

    def _stmt_continue(self, i: int, end: int) -> int:
        self._add(StatementKind.OTHER)
        return self._seek_semicolon(i, end)

    def _stmt_assert(self, i: int, end: int) -> int:
        self._add(StatementKind.OTHER)
        return self._seek_semicolon(i, end)

    def _stmt_class(self, i: int, end: int) -> int:
        # local class: skip its body wholesale
        self._add(StatementKind.OTHER)
        j = i
        while j < end and self.toks[j].text != "{":
            j += 1
        if j >= end:
            raise JavaSyntaxError("local class body expected", self.toks[i].line, self.toks[i].col)
        return self._match(j, end, "{")

    # declarations and expressions ------------------------------------------

    def _register_header_declaration(self, i: int, end: int):
        """Scope registration for for-init / for-each / try-resource headers."""
        info = self._read_declaration_head(i, end)
        if info is None:
            return
        name, type_name, _ = info
        self.scope[name] = type_name

    def _register_catch_parameter(self, i: int, end: int):
        j = i
        # multi-catch `A | B name` registers the first alternative's type
        saved = _TypeReader(self.toks, j, end).read()
        if saved is None:
            return
        type_name, j = saved
        while j < end and self.toks[j].text == "|":
            nxt = _TypeReader(self.toks, j + 1, end).read()
            if nxt is None:
                return
            _, j = nxt
        if j < end and self.toks[j].kind == WORD:
            self.scope[self.toks[j].text] = type_name

    def _read_declaration_head(self, i: int, end: int) -> tuple[str, str, int] | None:
        """Match `[final] Type name` at i; return (name, erased type, next index)."""
        j = i
        while j < end and self.toks[j].text == "final":
            j += 1
        read = _TypeReader(self.toks, j, end).read()
        if read is None:
            return None
        type_name, j = read
        if j >= end or self.toks[j].kind != WORD or self.toks[j].text in _RESERVED:
            return None
        name = self.toks[j].text
        j += 1
        while j + 1 < end and self.toks[j].text == "[" and self.toks[j + 1].text == "]":
            j += 2
        if j < end and self.toks[j].text in ("=", ";", ",", ":"):
            return name, type_name, j
        return None

    def _try_declaration(self, i: int, end: int) -> int | None:
        info = self._read_declaration_head(i, end)
        if info is None:
            return None
        name, type_name, j = info
        if j < end and self.toks[j].text == ":":
            return None  # for-each header fragment, not a statement
        self._add(StatementKind.LOCAL_DECLARATION)
        self.method.local_variable_count += 1
        self.scope[name] = type_name
        past = self._seek_semicolon(i, end)
        # register trailing declarators: `int a = 1, b = 2;`
        k = j
        depth = 0
        while k < past - 1:
            text = self.toks[k].text
            if text in ("(", "[", "{"):
                depth += 1
            elif text in (")", "]", "}"):
                depth -= 1
            elif text == "," and depth == 0:
                if k + 1 < past and self.toks[k + 1].kind == WORD:
                    self.scope[self.toks[k + 1].text] = type_name
            k += 1
        return past

    def _expression_statement(self, i: int, end: int) -> int:
        past = self._seek_semicolon(i, end)
        kind = StatementKind.OTHER
        depth = 0
        has_call = False
        for j in range(i, past - 1):
            t = self.toks[j]
            if t.text in ("(", "[", "{"):
                if (
                    t.text == "("
                    and j > i
                    and self.toks[j - 1].kind == WORD
                    and self.toks[j - 1].text not in _NOT_CALLEES
                    and self.toks[j - 1].text not in _RESERVED
                ):
                    has_call = True
                depth += 1
            elif t.text in (")", "]", "}"):
                depth -= 1
            elif depth == 0 and t.text in _ASSIGN_OPS:
                kind = StatementKind.ASSIGNMENT
                break
            elif depth == 0 and t.text in ("++", "--"):
                kind = StatementKind.ASSIGNMENT
                break
        if kind is StatementKind.OTHER and has_call:
            kind = StatementKind.INVOCATION
        self._add(kind)
        return past

    # -- call sites -----------------------------------------------------------

    def _scan_call_sites(self, start: int, end: int):
        for j in range(start, end):
            t = self.toks[j]
            if t.kind != WORD or t.text in _NOT_CALLEES or t.text in _RESERVED:
                continue
            if j + 1 >= end or self.toks[j + 1].text != "(":
                continue
            prev = self.toks[j - 1] if j > 0 else None
            if prev is not None:
                if prev.text == "new":
                    continue  # constructor invocation, not a call site
                # `Type name(` or `int[] name(`: a declaration header
                # (anonymous class member), not a call
                if prev.kind == WORD and (prev.text not in _RESERVED or prev.text in _PRIMITIVES):
                    continue
                if prev.text == "]":
                    continue
            argc = self._count_arguments(j + 1, end)
            receiver_kind, receiver_type = self._classify_receiver(j, start)
            self.method.call_sites.append(
                CallSite(
                    receiver_kind=receiver_kind,
                    receiver_type=receiver_type,
                    callee_name=t.text,
                    argument_count=argc,
                )
            )

    def _count_arguments(self, open_idx: int, end: int) -> int:
        depth = 0
        count = 0
        empty = True
        j = open_idx
        while j < end:
            text = self.toks[j].text
            if text in ("(", "[", "{"):
                depth += 1
            elif text in (")", "]", "}"):
                depth -= 1
                if depth == 0:
                    break
            elif depth == 1:
                empty = False
                if text == ",":
                    count += 1
            j += 1
        return 0 if empty else count + 1

    def _classify_receiver(self, callee_idx: int, start: int) -> tuple[ReceiverKind, str | None]:
        j = callee_idx - 1
        if j < start or self.toks[j].text != ".":
            return ReceiverKind.THIS_OR_IMPLICIT, None
        j -= 1
        if j < start:
            return ReceiverKind.UNKNOWN, None
        t = self.toks[j]
        if t.text == "this":
            prev = self.toks[j - 1] if j - 1 >= start else None
            if prev is not None and prev.text == ".":
                return ReceiverKind.UNKNOWN, None  # Outer.this.m()
            return ReceiverKind.THIS_OR_IMPLICIT, None
        if t.kind != WORD or t.text in _RESERVED:
            return ReceiverKind.UNKNOWN, None
        prev = self.toks[j - 1] if j - 1 >= start else None
        if prev is not None and prev.text == ".":
            return ReceiverKind.UNKNOWN, None  # chained receiver such as a.b.m()
        if t.text in self.scope:
            return ReceiverKind.VARIABLE, self.scope[t.text]
        if t.text in self.fields:
            return ReceiverKind.VARIABLE, self.fields[t.text]
        return ReceiverKind.TYPE_NAME, t.text


class _TypeReader:
    """Reads an erased type reference from a token window without side effects."""

    def __init__(self, tokens: list[Token], i: int, end: int):
        self.toks = tokens
        self.i = i
        self.end = end

    def read(self) -> tuple[str, int] | None:
        if self.i >= self.end or self.toks[self.i].kind != WORD:
            return None
        text = self.toks[self.i].text
        if text in _PRIMITIVES:
            name = text
            self.i += 1
        elif text in _RESERVED:
            return None
        else:
            name = text
            self.i += 1
            while (
                self.i + 1 < self.end
                and self.toks[self.i].text == "."
                and self.toks[self.i + 1].kind == WORD
                and self.toks[self.i + 1].text not in _RESERVED
            ):
                name = self.toks[self.i + 1].text
                self.i += 2
            if self.i < self.end and self.toks[self.i].text == "<":
                depth = 0
                j = self.i
                while j < self.end:
                    w = self.toks[j].text
                    if w == "<":
                        depth += 1
                    elif w == ">":
                        depth -= 1
                    elif w == ">>":
                        depth -= 2
                    elif w == ">>>":
                        depth -= 3
                    elif w in (";", "{", ")", "=") or depth == 0:
                        return None
                    if depth == 0:
                        self.i = j + 1
                        break
                    j += 1
                else:
                    return None
        while (
            self.i + 1 < self.end
            and self.toks[self.i].text == "["
            and self.toks[self.i + 1].text == "]"
        ):
            self.i += 2
        return name, self.i


# ---------------------------------------------------------------------------
# Public API
# ---------------------------------------------------------------------------


def parse_file(file: SourceFile) -> list[ClassModel]:
    """Parse one source file into class models (nested types flattened).

    Raises JavaSyntaxError with position info on unrecoverable input.
    """
    tokens = tokenize(file.content)
    parser = _Parser(tokens)
    return parser.parse_compilation_unit()


def parse_source(content: str, name: str = "<memory>") -> list[ClassModel]:
    return parse_file(SourceFile(project_id="", relative_path=name, content=content))


def parse_corpus(manifest: CorpusManifest) -> CodeModel:
    """Parse every manifest file; per-file failures become diagnostics."""
    classes_by_file: dict[str, list[ClassModel]] = {}
    diagnostics: list[tuple[str, str]] = []
    for source in manifest.files:
        try:
            classes_by_file[source.full_path] = parse_file(source)
        except JavaSyntaxError as exc:
            diagnostics.append((source.full_path, str(exc)))
            logger.warning("skipping %s: %s", source.full_path, exc)
    return CodeModel(manifest=manifest, classes_by_file=classes_by_file, diagnostics=diagnostics)


def dump_model_json(model: CodeModel) -> str:
    """Debug rendering of parsed class models (CLI --dump-model)."""
    payload = {}
    for path, models in model.classes_by_file.items():
        payload[path] = [
            {
                "name": m.name,
                "kind": m.kind,
                "modifiers": sorted(m.modifiers),
                "extends": m.extends_name,
                "implements": m.implements_names,
                "fields": [list(f) for f in m.field_names_and_types],
                "methods": [
                    {
                        "name": meth.name,
                        "modifiers": sorted(meth.modifiers),
                        "parameters": [list(p) for p in meth.parameters],
                        "return_type": meth.return_type,
                        "statements": [s.kind.value for s in meth.statements],
                        "local_variable_count": meth.local_variable_count,
                        "line_count": meth.line_count,
                        "call_sites": [
                            {
                                "receiver_kind": c.receiver_kind.value,
                                "receiver_type": c.receiver_type,
                                "callee": c.callee_name,
                                "argc": c.argument_count,
                            }
                            for c in meth.call_sites
                        ],
                    }
                    for meth in m.methods
                ],
            }
            for m in models
        ]
    payload["diagnostics"] = [list(d) for d in model.diagnostics]
    return json.dumps(payload, indent=2)
