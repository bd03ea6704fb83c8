"""Text format for attack/defense trees, plus a JSON interchange form.

The format is line-oriented and brace-delimited:

    tree "Name" {
      or GOAL "label" {
        and STEP "label" {
          leaf L1 "label" {
            prob 0.7 cost 1 impact 7 skill 0.5 threat B1 counter C3
          }
          ...
        }
      }
    }
    controls {
      control C3 "name" {
        type Probability value 0.8 cost 2 iso "14.1.3" gdpr "49"
      }
    }
    threats {
      threat-entry B1 { stride InformationDisclosure asset "Gateway" desc "..." }
    }

Grammar notes:
  * identifiers match [A-Za-z_][A-Za-z0-9_.]* and may not be keywords;
  * numbers are unsigned decimal literals with at most 6 fractional digits;
  * strings are double quoted with \\" and \\\\ escapes;
  * '#' starts a comment running to end of line;
  * each leaf declares prob, cost, impact and skill exactly once, and
    threat/counter at most once, in any order;
  * control bodies are ordered: type, value, cost, then the optional
    effectiveness, iso and gdpr fields;
  * threat-entry fields (stride, asset, desc) are each optional so that
    code-only catalogue stubs can be written down;
  * iso/gdpr strings hold comma-separated reference lists;
  * the controls/threats blocks are optional and may also stand alone in a
    file without a tree when read through parse_catalogue_file.

Parsing never raises on bad input: errors are accumulated with source
spans and the parser recovers by skipping to the matching close brace.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from enum import Enum
from typing import Any, Mapping

from .model import (
    AdNode,
    AdTree,
    ControlKind,
    Countermeasure,
    DomainError,
    LeafAttrs,
    NodeKind,
    Stride,
    ThreatEntry,
)

KEYWORDS = frozenset({
    "tree", "or", "and", "leaf",
    "prob", "cost", "impact", "skill", "threat", "counter",
    "controls", "control", "threats", "threat-entry",
    "type", "value", "effectiveness", "iso", "gdpr",
    "stride", "asset", "desc",
})

_MAX_FRACTION_DIGITS = 6

# DSL spelling of ControlKind members
_CONTROL_KINDS = {"Probability": ControlKind.PROBABILITY, "Impact": ControlKind.IMPACT}
_CONTROL_KIND_NAMES = {v: k for k, v in _CONTROL_KINDS.items()}


class TokenKind(Enum):
    KEYWORD = "keyword"
    IDENT = "identifier"
    NUMBER = "number"
    STRING = "string"
    LBRACE = "{"
    RBRACE = "}"
    EOF = "end of input"


@dataclass(frozen=True)
class SourceSpan:
    """Location of a token or construct in its source file, 1-based."""

    file: str
    line: int
    column: int
    length: int

    def __str__(self) -> str:
        return f"{self.file}:{self.line}:{self.column}"


@dataclass(frozen=True)
class Token:
    kind: TokenKind
    lexeme: str
    value: Any
    span: SourceSpan


@dataclass(frozen=True)
class ParseError:
    """One syntax problem, located by span."""

    span: SourceSpan
    message: str

    def __str__(self) -> str:
        return f"{self.span}: syntax: {self.message}"


def _is_ident_start(ch: str) -> bool:
    return ch.isascii() and (ch.isalpha() or ch == "_")


def _is_ident_char(ch: str) -> bool:
    return ch.isascii() and (ch.isalnum() or ch in "_.")


def tokenize(source: str, filename: str = "<input>") -> tuple[list[Token], list[ParseError]]:
    """Split source text into tokens, collecting errors instead of raising.

    The token stream always ends with an EOF token. Unknown characters and
    malformed literals produce an error and scanning continues, so a single
    pass reports every lexical problem in the file.
    """
    tokens: list[Token] = []
    errors: list[ParseError] = []
    line, col, i = 1, 1, 0
    n = len(source)

    def span(length: int, at_line: int | None = None, at_col: int | None = None) -> SourceSpan:
        return SourceSpan(filename, at_line or line, at_col or col, length)

    while i < n:
        ch = source[i]
        if ch == "\n":
            i += 1
            line += 1
            col = 1
            continue
        if ch in " \t\r":
            i += 1
            col += 1
            continue
        if ch == "#":
            while i < n and source[i] != "\n":
                i += 1
            continue
        if ch in "{}":
            kind = TokenKind.LBRACE if ch == "{" else TokenKind.RBRACE
            tokens.append(Token(kind, ch, ch, span(1)))
            i += 1
            col += 1
            continue
        if ch == '"':
            start_line, start_col, start = line, col, i
            i += 1
            col += 1
            parts: list[str] = []
            closed = False
            while i < n:
                c = source[i]
                if c == '"':
                    i += 1
                    col += 1
                    closed = True
                    break
                if c == "\n":
                    break
                if c == "\\":
                    if i + 1 < n and source[i + 1] in '"\\':
                        parts.append(source[i + 1])
                        i += 2
                        col += 2
                        continue
                    errors.append(ParseError(span(2), 'only \\" and \\\\ escapes are supported'))
                    i += 1
                    col += 1
                    continue
                parts.append(c)
                i += 1
                col += 1
            lexeme = source[start:i]
            if not closed:
                errors.append(ParseError(span(len(lexeme), start_line, start_col), "unterminated string"))
            tokens.append(Token(TokenKind.STRING, lexeme, "".join(parts),
                                span(len(lexeme), start_line, start_col)))
            continue
        if ch.isdigit():
            start_col, start = col, i
            while i < n and source[i].isdigit():
                i += 1
            if i < n and source[i] == "." and i + 1 < n and source[i + 1].isdigit():
                i += 1
                frac_start = i
                while i < n and source[i].isdigit():
                    i += 1
                if i - frac_start > _MAX_FRACTION_DIGITS:
                    errors.append(ParseError(span(i - start, line, start_col),
                                             f"numbers allow at most {_MAX_FRACTION_DIGITS} fractional digits"))
            lexeme = source[start:i]
            col += len(lexeme)
            tokens.append(Token(TokenKind.NUMBER, lexeme, float(lexeme),
                                span(len(lexeme), line, start_col)))
            continue
        if _is_ident_start(ch):
            start_col, start = col, i
            while i < n and _is_ident_char(source[i]):
                i += 1
            # the one hyphenated keyword would otherwise split at '-'
            if source[start:i] == "threat" and source[i:i + 6] == "-entry" and \
                    not (i + 6 < n and _is_ident_char(source[i + 6])):
                i += 6
            lexeme = source[start:i]
            col += len(lexeme)
            kind = TokenKind.KEYWORD if lexeme in KEYWORDS else TokenKind.IDENT
            tokens.append(Token(kind, lexeme, lexeme, span(len(lexeme), line, start_col)))
            continue
        errors.append(ParseError(span(1), f"unexpected character {ch!r}"))
        i += 1
        col += 1

    tokens.append(Token(TokenKind.EOF, "", None, span(0)))
    return tokens, errors


@dataclass(frozen=True)
class ParseResult:
    """Outcome of parsing a tree file.

    tree is None whenever errors is non-empty. Spans map node ids (and
    (node id, attribute) pairs) back to source locations so that later
    validation findings can be reported against the original text.
    """

    tree: AdTree | None
    errors: tuple[ParseError, ...]
    node_spans: Mapping[str, SourceSpan] = field(default_factory=dict)
    attr_spans: Mapping[tuple[str, str], SourceSpan] = field(default_factory=dict)

    @property
    def ok(self) -> bool:
        return self.tree is not None and not self.errors


@dataclass(frozen=True)
class CatalogueResult:
    """Outcome of parsing a file for its catalogues (tree optional)."""

    controls: Mapping[str, Countermeasure]
    threats: Mapping[str, ThreatEntry]
    tree: AdTree | None
    errors: tuple[ParseError, ...]
    node_spans: Mapping[str, SourceSpan] = field(default_factory=dict)
    attr_spans: Mapping[tuple[str, str], SourceSpan] = field(default_factory=dict)
    control_spans: Mapping[str, SourceSpan] = field(default_factory=dict)
    threat_spans: Mapping[str, SourceSpan] = field(default_factory=dict)

    @property
    def ok(self) -> bool:
        return not self.errors


class _Recover(Exception):
    """Internal signal: error recorded, skip to the enclosing close brace."""


class _Parser:
    def __init__(self, tokens: list[Token], errors: list[ParseError]):
        self.tokens = tokens
        self.errors = errors
        self.pos = 0
        self.node_spans: dict[str, SourceSpan] = {}
        self.attr_spans: dict[tuple[str, str], SourceSpan] = {}
        self.control_spans: dict[str, SourceSpan] = {}
        self.threat_spans: dict[str, SourceSpan] = {}

    def peek(self) -> Token:
        return self.tokens[self.pos]

    def advance(self) -> Token:
        tok = self.tokens[self.pos]
        if tok.kind is not TokenKind.EOF:
            self.pos += 1
        return tok

    def at_keyword(self, *words: str) -> bool:
        tok = self.peek()
        return tok.kind is TokenKind.KEYWORD and tok.lexeme in words

    def error(self, message: str, tok: Token | None = None) -> None:
        tok = tok or self.peek()
        self.errors.append(ParseError(tok.span, message))

    def fail(self, message: str, tok: Token | None = None) -> _Recover:
        self.error(message, tok)
        return _Recover()

    def describe(self, tok: Token) -> str:
        if tok.kind is TokenKind.EOF:
            return "end of input"
        return f"{tok.kind.value} {tok.lexeme!r}"

    def expect_keyword(self, word: str) -> Token:
        if not self.at_keyword(word):
            raise self.fail(f"expected {word!r}, found {self.describe(self.peek())}")
        return self.advance()

    def expect(self, kind: TokenKind, what: str) -> Token:
        tok = self.peek()
        if tok.kind is not kind:
            raise self.fail(f"expected {what}, found {self.describe(tok)}")
        return self.advance()

    def skip_to_close(self) -> None:
        # recovery point: consume up to and including the } that closes the
        # block we are currently inside of
        depth = 0
        while True:
            tok = self.peek()
            if tok.kind is TokenKind.EOF:
                return
            self.advance()
            if tok.kind is TokenKind.LBRACE:
                depth += 1
            elif tok.kind is TokenKind.RBRACE:
                if depth == 0:
                    return
                depth -= 1

    # node productions ----------------------------------------------------

    def parse_node(self) -> AdNode | None:
        if self.at_keyword("leaf"):
            return self.parse_leaf()
        if self.at_keyword("or", "and"):
            return self.parse_gate()
        raise self.fail(f"expected 'or', 'and' or 'leaf', found {self.describe(self.peek())}")

    def parse_gate(self) -> AdNode | None:
        kw = self.advance()
        kind = NodeKind.OR if kw.lexeme == "or" else NodeKind.AND
        ident = self.expect(TokenKind.IDENT, "gate identifier")
        label = self.expect(TokenKind.STRING, "gate label string")
        self.expect(TokenKind.LBRACE, "'{'")
        self.node_spans.setdefault(ident.value, ident.span)
        children: list[AdNode] = []
        while not self.peek().kind is TokenKind.RBRACE:
            if self.peek().kind is TokenKind.EOF:
                raise self.fail(f"unclosed gate {ident.value!r}")
            try:
                child = self.parse_node()
            except _Recover:
                self.skip_to_close()
                return None
            if child is not None:
                children.append(child)
        self.advance()
        if not children:
            self.error(f"gate {ident.value!r} must have at least one child", ident)
        return AdNode(id=ident.value, label=label.value, kind=kind, children=tuple(children))

    def parse_leaf(self) -> AdNode | None:
        self.advance()
        ident = self.expect(TokenKind.IDENT, "leaf identifier")
        label = self.expect(TokenKind.STRING, "leaf label string")
        self.expect(TokenKind.LBRACE, "'{'")
        self.node_spans.setdefault(ident.value, ident.span)
        numeric: dict[str, float] = {}
        refs: dict[str, str] = {}
        # recover from body errors here so the leaf consumes its own closing
        # brace and sibling nodes still get parsed
        try:
            while self.peek().kind is not TokenKind.RBRACE:
                tok = self.peek()
                if tok.kind is TokenKind.EOF:
                    raise self.fail(f"unclosed leaf {ident.value!r}")
                if self.at_keyword("prob", "cost", "impact", "skill"):
                    self.advance()
                    value = self.expect(TokenKind.NUMBER, f"number after {tok.lexeme!r}")
                    if tok.lexeme in numeric:
                        self.error(f"duplicate {tok.lexeme!r} in leaf {ident.value!r}", tok)
                    numeric[tok.lexeme] = value.value
                    self.attr_spans[(ident.value, tok.lexeme)] = value.span
                elif self.at_keyword("threat", "counter"):
                    self.advance()
                    code = self.expect(TokenKind.IDENT, f"code after {tok.lexeme!r}")
                    if tok.lexeme in refs:
                        self.error(f"duplicate {tok.lexeme!r} in leaf {ident.value!r}", tok)
                    refs[tok.lexeme] = code.value
                    self.attr_spans[(ident.value, tok.lexeme)] = code.span
                else:
                    raise self.fail(f"expected a leaf attribute, found {self.describe(tok)}")
            self.advance()
        except _Recover:
            self.skip_to_close()
            return None
        missing = [a for a in ("prob", "cost", "impact", "skill") if a not in numeric]
        if missing:
            self.error(f"leaf {ident.value!r} is missing {', '.join(missing)}", ident)
            return None
        attrs = LeafAttrs(probability=numeric["prob"], cost=numeric["cost"],
                          impact=numeric["impact"], skill=numeric["skill"])
        return AdNode(id=ident.value, label=label.value, kind=NodeKind.LEAF,
                      leaf_attrs=attrs, threat_code=refs.get("threat"),
                      countermeasure_code=refs.get("counter"))

    # catalogue productions ------------------------------------------------

    def parse_controls_block(self) -> dict[str, Countermeasure]:
        controls: dict[str, Countermeasure] = {}
        self.expect_keyword("controls")
        self.expect(TokenKind.LBRACE, "'{'")
        while self.peek().kind is not TokenKind.RBRACE:
            if self.peek().kind is TokenKind.EOF:
                raise self.fail("unclosed controls block")
            try:
                cm = self.parse_control()
            except _Recover:
                self.skip_to_close()
                return controls
            if cm is not None:
                if cm.code in controls:
                    self.error(f"control {cm.code!r} declared more than once")
                controls[cm.code] = cm
        self.advance()
        return controls

    def parse_control(self) -> Countermeasure | None:
        self.expect_keyword("control")
        ident = self.expect(TokenKind.IDENT, "control code")
        self.control_spans.setdefault(ident.value, ident.span)
        name = self.expect(TokenKind.STRING, "control name string")
        self.expect(TokenKind.LBRACE, "'{'")
        # body errors are recovered here so the control consumes its own
        # closing brace and the rest of the block still gets parsed
        try:
            self.expect_keyword("type")
            kind_tok = self.expect(TokenKind.IDENT, "control type (Probability or Impact)")
            kind = _CONTROL_KINDS.get(kind_tok.value)
            if kind is None:
                self.error(f"control type must be Probability or Impact, found {kind_tok.value!r}", kind_tok)
            self.expect_keyword("value")
            value = self.expect(TokenKind.NUMBER, "number after 'value'")
            self.expect_keyword("cost")
            cost = self.expect(TokenKind.NUMBER, "number after 'cost'")
            effectiveness = None
            if self.at_keyword("effectiveness"):
                self.advance()
                effectiveness = self.expect(TokenKind.NUMBER, "number after 'effectiveness'").value
            iso: tuple[str, ...] = ()
            gdpr: tuple[str, ...] = ()
            if self.at_keyword("iso"):
                self.advance()
                iso = _split_refs(self.expect(TokenKind.STRING, "string after 'iso'").value)
            if self.at_keyword("gdpr"):
                self.advance()
                gdpr = _split_refs(self.expect(TokenKind.STRING, "string after 'gdpr'").value)
            self.expect(TokenKind.RBRACE, "'}'")
        except _Recover:
            self.skip_to_close()
            return None
        if kind is None:
            return None
        if not float(cost.value).is_integer():
            self.error(f"control cost must be an integer, got {cost.lexeme}", cost)
            return None
        try:
            return Countermeasure(code=ident.value, name=name.value, kind=kind,
                                  value=value.value, cost=int(cost.value),
                                  effectiveness=effectiveness,
                                  iso_sections=iso, gdpr_articles=gdpr)
        except DomainError as exc:
            self.error(str(exc), ident)
            return None

    def parse_threats_block(self) -> dict[str, ThreatEntry]:
        threats: dict[str, ThreatEntry] = {}
        self.expect_keyword("threats")
        self.expect(TokenKind.LBRACE, "'{'")
        while self.peek().kind is not TokenKind.RBRACE:
            if self.peek().kind is TokenKind.EOF:
                raise self.fail("unclosed threats block")
            try:
                entry = self.parse_threat_entry()
            except _Recover:
                self.skip_to_close()
                return threats
            if entry is not None:
                if entry.code in threats:
                    self.error(f"threat entry {entry.code!r} declared more than once")
                threats[entry.code] = entry
        self.advance()
        return threats

    def parse_threat_entry(self) -> ThreatEntry | None:
        self.expect_keyword("threat-entry")
        ident = self.expect(TokenKind.IDENT, "threat code")
        self.threat_spans.setdefault(ident.value, ident.span)
        self.expect(TokenKind.LBRACE, "'{'")
        stride: Stride | None = None
        asset = ""
        desc = ""
        bad_stride = False
        try:
            if self.at_keyword("stride"):
                self.advance()
                stride_tok = self.expect(TokenKind.IDENT, "category after 'stride'")
                try:
                    stride = Stride(stride_tok.value)
                except ValueError:
                    self.error(f"unknown stride category {stride_tok.value!r}", stride_tok)
                    bad_stride = True
            if self.at_keyword("asset"):
                self.advance()
                asset = self.expect(TokenKind.STRING, "string after 'asset'").value
            if self.at_keyword("desc"):
                self.advance()
                desc = self.expect(TokenKind.STRING, "string after 'desc'").value
            self.expect(TokenKind.RBRACE, "'}'")
        except _Recover:
            self.skip_to_close()
            return None
        if bad_stride:
            return None
        return ThreatEntry(code=ident.value, description=desc, asset=asset, stride=stride)

    def parse_catalogues(self) -> tuple[dict[str, Countermeasure], dict[str, ThreatEntry]]:
        controls: dict[str, Countermeasure] = {}
        threats: dict[str, ThreatEntry] = {}
        if self.at_keyword("controls"):
            controls = self.parse_controls_block()
        if self.at_keyword("threats"):
            threats = self.parse_threats_block()
        return controls, threats

    def expect_eof(self) -> None:
        tok = self.peek()
        if tok.kind is not TokenKind.EOF:
            self.error(f"unexpected {self.describe(tok)} after end of document")

    def parse_tree_decl(self) -> AdTree | None:
        try:
            self.expect_keyword("tree")
            name = self.expect(TokenKind.STRING, "tree name string")
            self.expect(TokenKind.LBRACE, "'{'")
            try:
                root = self.parse_node()
            except _Recover:
                self.skip_to_close()
                root = None
            else:
                self.expect(TokenKind.RBRACE, "'}' closing the tree")
        except _Recover:
            self.skip_to_close()
            return None
        try:
            controls, threats = self.parse_catalogues()
        except _Recover:
            self.skip_to_close()
            controls, threats = {}, {}
        self.expect_eof()
        if root is None:
            return None
        return AdTree(name=name.value, root=root, controls=controls, threats=threats)


def parse_tree_file(source: str, filename: str = "<input>") -> ParseResult:
    """Parse a complete tree document.

    Returns the tree together with source spans for every node and leaf
    attribute, or the accumulated ParseErrors when the document is broken.
    """
    tokens, errors = tokenize(source, filename)
    parser = _Parser(tokens, errors)
    tree = parser.parse_tree_decl()
    if errors:
        tree = None
    return ParseResult(tree=tree, errors=tuple(errors),
                       node_spans=parser.node_spans, attr_spans=parser.attr_spans)


def parse_catalogue_file(source: str, filename: str = "<input>") -> CatalogueResult:
    """Parse a document for its catalogues.

    Accepts both full tree documents and standalone catalogue files that
    contain only controls/threats blocks.
    """
    tokens, errors = tokenize(source, filename)
    parser = _Parser(tokens, errors)
    tree: AdTree | None = None
    if parser.at_keyword("tree"):
        tree = parser.parse_tree_decl()
        if errors:
            tree = None
        controls = dict(tree.controls) if tree else {}
        threats = dict(tree.threats) if tree else {}
    else:
        try:
            controls, threats = parser.parse_catalogues()
        except _Recover:
            parser.skip_to_close()
            controls, threats = {}, {}
        parser.expect_eof()
    return CatalogueResult(controls=controls, threats=threats, tree=tree, errors=tuple(errors),
                           node_spans=parser.node_spans, attr_spans=parser.attr_spans,
                           control_spans=parser.control_spans, threat_spans=parser.threat_spans)


# serialisation -----------------------------------------------------------


def _split_refs(text: str) -> tuple[str, ...]:
    return tuple(part.strip() for part in text.split(",") if part.strip())


def _escape(text: str) -> str:
    return text.replace("\\", "\\\\").replace('"', '\\"')


def _format_number(x: float) -> str:
    # canonical decimal text: integers bare, otherwise shortest form with
    # at most 6 fractional digits and no exponent notation
    if float(x).is_integer():
        return str(int(x))
    s = repr(float(x))
    if "e" in s or "E" in s or ("." in s and len(s.split(".")[1]) > _MAX_FRACTION_DIGITS):
        s = f"{x:.{_MAX_FRACTION_DIGITS}f}"
    return s.rstrip("0").rstrip(".") if "." in s else s


def _serialize_node(node: AdNode, depth: int, out: list[str]) -> None:
    pad = "  " * depth
    if node.is_leaf:
        out.append(f'{pad}leaf {node.id} "{_escape(node.label)}" {{')
        a = node.leaf_attrs
        parts = [f"prob {_format_number(a.probability)}", f"cost {_format_number(a.cost)}",
                 f"impact {_format_number(a.impact)}", f"skill {_format_number(a.skill)}"]
        if node.threat_code:
            parts.append(f"threat {node.threat_code}")
        if node.countermeasure_code:
            parts.append(f"counter {node.countermeasure_code}")
        out.append(f"{pad}  {' '.join(parts)}")
        out.append(f"{pad}}}")
    else:
        word = "or" if node.kind is NodeKind.OR else "and"
        out.append(f'{pad}{word} {node.id} "{_escape(node.label)}" {{')
        for child in node.children:
            _serialize_node(child, depth + 1, out)
        out.append(f"{pad}}}")


def serialize_tree(tree: AdTree) -> str:
    """Render a tree (and its catalogues) in canonical text form.

    The output is deterministic, 2-space indented, and parses back to an
    equal tree. Comments from the original source are not preserved.
    """
    out: list[str] = [f'tree "{_escape(tree.name)}" {{']
    _serialize_node(tree.root, 1, out)
    out.append("}")
    if tree.controls:
        out.append("controls {")
        for cm in tree.controls.values():
            out.append(f'  control {cm.code} "{_escape(cm.name)}" {{')
            parts = [f"type {_CONTROL_KIND_NAMES[cm.kind]}",
                     f"value {_format_number(cm.value)}", f"cost {cm.cost}"]
            if cm.effectiveness is not None:
                parts.append(f"effectiveness {_format_number(cm.effectiveness)}")
            if cm.iso_sections:
                parts.append(f'iso "{_escape(", ".join(cm.iso_sections))}"')
            if cm.gdpr_articles:
                parts.append(f'gdpr "{_escape(", ".join(cm.gdpr_articles))}"')
            out.append(f"    {' '.join(parts)}")
            out.append("  }")
        out.append("}")
    if tree.threats:
        out.append("threats {")
        for entry in tree.threats.values():
            parts = []
            if entry.stride is not None:
                parts.append(f"stride {entry.stride.value}")
            if entry.asset:
                parts.append(f'asset "{_escape(entry.asset)}"')
            if entry.description:
                parts.append(f'desc "{_escape(entry.description)}"')
            body = f" {' '.join(parts)} " if parts else " "
            out.append(f"  threat-entry {entry.code} {{{body}}}")
        out.append("}")
    return "\n".join(out) + "\n"


# JSON interchange ---------------------------------------------------------


@dataclass(frozen=True)
class JsonError:
    """A schema problem in a JSON document, located by JSON-pointer path."""

    path: str
    message: str

    def __str__(self) -> str:
        where = self.path or "<document root>"
        return f"{where}: {self.message}"


@dataclass(frozen=True)
class JsonResult:
    tree: AdTree | None
    errors: tuple[JsonError, ...]

    @property
    def ok(self) -> bool:
        return self.tree is not None and not self.errors


def _node_to_obj(node: AdNode) -> dict[str, Any]:
    obj: dict[str, Any] = {"id": node.id, "label": node.label, "kind": node.kind.value}
    if node.is_leaf:
        a = node.leaf_attrs
        obj["attrs"] = {"prob": a.probability, "cost": a.cost,
                        "impact": a.impact, "skill": a.skill}
        if node.threat_code is not None:
            obj["threat"] = node.threat_code
        if node.countermeasure_code is not None:
            obj["counter"] = node.countermeasure_code
    else:
        obj["children"] = [_node_to_obj(c) for c in node.children]
    return obj


def to_json(tree: AdTree) -> str:
    """Render a tree as indented JSON mirroring the model field-for-field."""
    controls = []
    for cm in tree.controls.values():
        obj: dict[str, Any] = {"code": cm.code, "name": cm.name, "kind": cm.kind.value,
                               "value": cm.value, "cost": cm.cost,
                               "iso_sections": list(cm.iso_sections),
                               "gdpr_articles": list(cm.gdpr_articles)}
        if cm.effectiveness is not None:
            obj["effectiveness"] = cm.effectiveness
        if cm.declared_final is not None:
            obj["declared_final"] = cm.declared_final
        controls.append(obj)
    threats = []
    for entry in tree.threats.values():
        threats.append({"code": entry.code, "description": entry.description,
                        "asset": entry.asset,
                        "stride": entry.stride.value if entry.stride else None,
                        "vulnerability": entry.vulnerability})
    doc = {"name": tree.name, "root": _node_to_obj(tree.root),
           "controls": controls, "threats": threats}
    return json.dumps(doc, indent=2) + "\n"


class _JsonReader:
    def __init__(self) -> None:
        self.errors: list[JsonError] = []

    def error(self, path: str, message: str) -> None:
        self.errors.append(JsonError(path, message))

    def str_field(self, obj: dict, path: str, key: str, required: bool = True, default: str = "") -> str:
        if key not in obj:
            if required:
                self.error(f"{path}/{key}", "missing required field")
            return default
        v = obj[key]
        if not isinstance(v, str):
            self.error(f"{path}/{key}", f"expected string, got {type(v).__name__}")
            return default
        return v

    def num_field(self, obj: dict, path: str, key: str) -> float:
        if key not in obj:
            self.error(f"{path}/{key}", "missing required field")
            return 0.0
        v = obj[key]
        if isinstance(v, bool) or not isinstance(v, (int, float)):
            self.error(f"{path}/{key}", f"expected number, got {type(v).__name__}")
            return 0.0
        return float(v)

    def node(self, obj: Any, path: str) -> AdNode | None:
        if not isinstance(obj, dict):
            self.error(path, f"expected object, got {type(obj).__name__}")
            return None
        node_id = self.str_field(obj, path, "id")
        label = self.str_field(obj, path, "label", required=False)
        kind_text = self.str_field(obj, path, "kind")
        try:
            kind = NodeKind(kind_text)
        except ValueError:
            self.error(f"{path}/kind", f"expected one of Leaf, And, Or; got {kind_text!r}")
            return None
        if kind is NodeKind.LEAF:
            attrs_obj = obj.get("attrs")
            if not isinstance(attrs_obj, dict):
                self.error(f"{path}/attrs", "leaf requires an attrs object")
                return None
            apath = f"{path}/attrs"
            attrs = LeafAttrs(probability=self.num_field(attrs_obj, apath, "prob"),
                              cost=self.num_field(attrs_obj, apath, "cost"),
                              impact=self.num_field(attrs_obj, apath, "impact"),
                              skill=self.num_field(attrs_obj, apath, "skill"))
            threat = obj.get("threat")
            counter = obj.get("counter")
            if threat is not None and not isinstance(threat, str):
                self.error(f"{path}/threat", "expected string")
                threat = None
            if counter is not None and not isinstance(counter, str):
                self.error(f"{path}/counter", "expected string")
                counter = None
            return AdNode(id=node_id, label=label, kind=kind, leaf_attrs=attrs,
                          threat_code=threat, countermeasure_code=counter)
        if "children" not in obj:
            self.error(f"{path}/children", "missing required field")
            return None
        children_obj = obj["children"]
        if not isinstance(children_obj, list):
            self.error(f"{path}/children", f"expected array, got {type(children_obj).__name__}")
            return None
        children = []
        for idx, child in enumerate(children_obj):
            parsed = self.node(child, f"{path}/children/{idx}")
            if parsed is not None:
                children.append(parsed)
        return AdNode(id=node_id, label=label, kind=kind, children=tuple(children))

    def control(self, obj: Any, path: str) -> Countermeasure | None:
        if not isinstance(obj, dict):
            self.error(path, f"expected object, got {type(obj).__name__}")
            return None
        code = self.str_field(obj, path, "code")
        kind_text = self.str_field(obj, path, "kind")
        try:
            kind = ControlKind(kind_text)
        except ValueError:
            self.error(f"{path}/kind", f"expected one of {[k.value for k in ControlKind]}, got {kind_text!r}")
            return None
        value = self.num_field(obj, path, "value")
        cost = self.num_field(obj, path, "cost")
        effectiveness = obj.get("effectiveness")
        if effectiveness is not None and (isinstance(effectiveness, bool) or
                                          not isinstance(effectiveness, (int, float))):
            self.error(f"{path}/effectiveness", "expected number")
            effectiveness = None
        declared_final = obj.get("declared_final")
        if declared_final is not None and (isinstance(declared_final, bool) or
                                           not isinstance(declared_final, (int, float))):
            self.error(f"{path}/declared_final", "expected number")
            declared_final = None
        iso = obj.get("iso_sections", [])
        gdpr = obj.get("gdpr_articles", [])
        if not (isinstance(iso, list) and all(isinstance(s, str) for s in iso)):
            self.error(f"{path}/iso_sections", "expected array of strings")
            iso = []
        if not (isinstance(gdpr, list) and all(isinstance(s, str) for s in gdpr)):
            self.error(f"{path}/gdpr_articles", "expected array of strings")
            gdpr = []
        if not float(cost).is_integer():
            self.error(f"{path}/cost", "expected integer")
            return None
        try:
            return Countermeasure(code=code, name=self.str_field(obj, path, "name", required=False),
                                  kind=kind, value=value, cost=int(cost),
                                  effectiveness=effectiveness, iso_sections=tuple(iso),
                                  gdpr_articles=tuple(gdpr), declared_final=declared_final)
        except DomainError as exc:
            self.error(path, str(exc))
            return None

    def threat(self, obj: Any, path: str) -> ThreatEntry | None:
        if not isinstance(obj, dict):
            self.error(path, f"expected object, got {type(obj).__name__}")
            return None
        code = self.str_field(obj, path, "code")
        stride_text = obj.get("stride")
        stride: Stride | None = None
        if stride_text is not None:
            try:
                stride = Stride(stride_text)
            except ValueError:
                self.error(f"{path}/stride", f"unknown stride category {stride_text!r}")
        return ThreatEntry(code=code,
                           description=self.str_field(obj, path, "description", required=False),
                           asset=self.str_field(obj, path, "asset", required=False),
                           stride=stride,
                           vulnerability=self.str_field(obj, path, "vulnerability", required=False))


def from_json(text: str) -> JsonResult:
    """Parse the JSON interchange form back into a tree.

    Schema problems are reported with JSON-pointer style paths; the tree is
    None whenever any error was found.
    """
    reader = _JsonReader()
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        reader.error("", f"invalid JSON: {exc.msg} (line {exc.lineno} column {exc.colno})")
        return JsonResult(tree=None, errors=tuple(reader.errors))
    if not isinstance(doc, dict):
        reader.error("", f"expected object, got {type(doc).__name__}")
        return JsonResult(tree=None, errors=tuple(reader.errors))
    name = reader.str_field(doc, "", "name")
    root = None
    if "root" not in doc:
        reader.error("/root", "missing required field")
    else:
        root = reader.node(doc["root"], "/root")
    controls: dict[str, Countermeasure] = {}
    threats: dict[str, ThreatEntry] = {}
    controls_obj = doc.get("controls", [])
    if not isinstance(controls_obj, list):
        reader.error("/controls", "expected array")
    else:
        for idx, item in enumerate(controls_obj):
            cm = reader.control(item, f"/controls/{idx}")
            if cm is not None:
                controls[cm.code] = cm
    threats_obj = doc.get("threats", [])
    if not isinstance(threats_obj, list):
        reader.error("/threats", "expected array")
    else:
        for idx, item in enumerate(threats_obj):
            entry = reader.threat(item, f"/threats/{idx}")
            if entry is not None:
                threats[entry.code] = entry
    if reader.errors or root is None:
        return JsonResult(tree=None, errors=tuple(reader.errors))
    return JsonResult(tree=AdTree(name=name, root=root, controls=controls, threats=threats),
                      errors=())
