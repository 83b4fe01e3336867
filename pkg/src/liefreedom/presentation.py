"""Parser for the presentation input language.

A document declares the ground field, the generators, the series shape and
the truncation degree, lists relators as Lie expressions, and ends with
one or more check directives::

    field Q
    generators y1 y2 y3
    series base=1 steps=3,2
    truncate 7
    relator [y1, y3]
    check theorem1

Expressions support sums and differences of optionally scaled factors,
where a factor is a generator, a bracket [expr, expr], or a
parenthesized expression; scalars are integers or fractions in the
declared field.  ``#`` starts a comment running to the end of the line.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from .fields import QQ, FieldError, GF
from .freelie import AlgebraContext, LieElement, SeriesSpec
from .words import GeneratorSet


class ParseError(ValueError):
    def __init__(self, message, line, col, expected=None):
        detail = f"line {line}, column {col}: {message}"
        if expected:
            detail += f" (expected {expected})"
        super().__init__(detail)
        self.line = line
        self.col = col
        self.expected = expected


# -- expression nodes (kept structural for the print/parse round trip)


@dataclass(frozen=True)
class GenNode:
    name: str
    line: int = field(default=0, compare=False)
    col: int = field(default=0, compare=False)


@dataclass(frozen=True)
class BracketNode:
    left: object
    right: object


@dataclass(frozen=True)
class ScaleNode:
    num: int
    den: int
    node: object


@dataclass(frozen=True)
class SumNode:
    terms: tuple  # of (sign, node) with sign +1 or -1


@dataclass
class CheckDirective:
    kind: str  # theorem1 | theorem2 | fox | triangularize


@dataclass
class PresentationDocument:
    field_decl: object
    generator_decl: list
    series_decl: SeriesSpec
    truncate_decl: int
    relators: list  # expression nodes
    checks: list    # CheckDirective


_SYMBOLS = ("[", "]", "(", ")", ",", "+", "-", "*", "/", "=")
_KEYWORDS = ("field", "generators", "series", "truncate", "relator", "check")
_CHECK_KINDS = ("theorem1", "theorem2", "fox", "triangularize")


@dataclass
class _Token:
    kind: str  # "ident" | "int" | symbol | "eof"
    text: str
    line: int
    col: int


def _tokenize(text):
    tokens = []
    line, col = 1, 1
    i = 0
    while i < len(text):
        ch = text[i]
        if ch == "\n":
            line += 1
            col = 1
            i += 1
            continue
        if ch in " \t\r":
            i += 1
            col += 1
            continue
        if ch == "#":
            while i < len(text) and text[i] != "\n":
                i += 1
            continue
        if ch in _SYMBOLS:
            tokens.append(_Token(ch, ch, line, col))
            i += 1
            col += 1
            continue
        if ch.isdigit():
            j = i
            while j < len(text) and text[j].isdigit():
                j += 1
            tokens.append(_Token("int", text[i:j], line, col))
            col += j - i
            i = j
            continue
        if ch.isalpha() or ch == "_":
            j = i
            while j < len(text) and (text[j].isalnum() or text[j] == "_"):
                j += 1
            tokens.append(_Token("ident", text[i:j], line, col))
            col += j - i
            i = j
            continue
        raise ParseError(f"unexpected character {ch!r}", line, col)
    tokens.append(_Token("eof", "", line, col))
    return tokens


class _Parser:
    def __init__(self, text):
        self.tokens = _tokenize(text)
        self.pos = 0

    def peek(self):
        return self.tokens[self.pos]

    def advance(self):
        tok = self.tokens[self.pos]
        self.pos += 1
        return tok

    def expect(self, kind, expected=None):
        tok = self.peek()
        if tok.kind != kind:
            raise ParseError(f"unexpected {tok.kind or tok.text!r} {tok.text!r}",
                             tok.line, tok.col, expected or kind)
        return self.advance()

    def expect_ident(self, *choices):
        tok = self.expect("ident", expected=" or ".join(choices) if choices else "name")
        if choices and tok.text not in choices:
            raise ParseError(f"unexpected word {tok.text!r}", tok.line, tok.col,
                             " or ".join(choices))
        return tok

    def expect_int(self):
        return int(self.expect("int", expected="integer").text)

    # -- grammar

    def document(self):
        field_decl = None
        generators = None
        series = None
        truncate = None
        relators = []
        checks = []
        while True:
            tok = self.peek()
            if tok.kind == "eof":
                break
            if tok.kind != "ident" or tok.text not in _KEYWORDS:
                raise ParseError(f"unexpected {tok.text!r}", tok.line, tok.col,
                                 "a declaration or check")
            key = self.advance().text
            if key == "field":
                field_decl = self.field_decl()
            elif key == "generators":
                generators = self.generator_decl()
            elif key == "series":
                series = self.series_decl()
            elif key == "truncate":
                truncate = self.expect_int()
            elif key == "relator":
                relators.append(self.expr())
            elif key == "check":
                kind = self.expect_ident(*_CHECK_KINDS)
                checks.append(CheckDirective(kind.text))
        tok = self.peek()
        if not checks:
            raise ParseError("document has no check directive", tok.line, tok.col)
        if generators is None:
            raise ParseError("document declares no generators", tok.line, tok.col)
        if series is None:
            raise ParseError("document declares no series", tok.line, tok.col)
        return PresentationDocument(field_decl, generators, series,
                                    truncate if truncate is not None else 6,
                                    relators, checks)

    def field_decl(self):
        tok = self.expect_ident()
        word = tok.text.upper()
        if word == "Q":
            return QQ
        if word == "GF":
            p = self.expect_int()
            try:
                return GF(p)
            except FieldError as exc:
                raise ParseError(str(exc), tok.line, tok.col) from None
        raise ParseError(f"unknown field {tok.text!r}", tok.line, tok.col,
                         "Q or GF p")

    def generator_decl(self):
        names = [self.expect_ident().text]
        while self.peek().kind == "ident" and self.peek().text not in _KEYWORDS:
            names.append(self.advance().text)
        return names

    def series_decl(self):
        self.expect_ident("base")
        self.expect("=")
        base = self.expect_int()
        self.expect_ident("steps")
        self.expect("=")
        steps = [self.expect_int()]
        while self.peek().kind == ",":
            self.advance()
            steps.append(self.expect_int())
        return SeriesSpec(base, tuple(steps))

    def expr(self):
        terms = [(1, self.term())]
        while self.peek().kind in ("+", "-"):
            sign = 1 if self.advance().kind == "+" else -1
            terms.append((sign, self.term()))
        if len(terms) == 1 and terms[0][0] == 1:
            return terms[0][1]
        return SumNode(tuple(terms))

    def term(self):
        tok = self.peek()
        if tok.kind == "int":
            num = self.expect_int()
            den = 1
            if self.peek().kind == "/":
                self.advance()
                den = self.expect_int()
            self.expect("*", expected="'*' after a scalar")
            return ScaleNode(num, den, self.factor())
        return self.factor()

    def factor(self):
        tok = self.peek()
        if tok.kind == "ident":
            got = self.advance()
            return GenNode(got.text, got.line, got.col)
        if tok.kind == "[":
            self.advance()
            left = self.expr()
            self.expect(",", expected="',' between bracket entries")
            right = self.expr()
            self.expect("]", expected="']'")
            return BracketNode(left, right)
        if tok.kind == "(":
            self.advance()
            inner = self.expr()
            self.expect(")", expected="')'")
            return inner
        raise ParseError(f"unexpected {tok.text!r}", tok.line, tok.col,
                         "a generator, '[' or '('")


def parse_presentation(text):
    """Parse a document; syntax errors carry line and column."""
    return _Parser(text).document()


def format_document(doc):
    """Deterministic printer; reparsing the output gives an equal document."""
    lines = []
    if doc.field_decl is not None:
        if doc.field_decl == QQ:
            lines.append("field Q")
        else:
            lines.append(f"field GF {doc.field_decl.p}")
    lines.append("generators " + " ".join(doc.generator_decl))
    steps = ",".join(str(s) for s in doc.series_decl.steps)
    lines.append(f"series base={doc.series_decl.base_class} steps={steps}")
    lines.append(f"truncate {doc.truncate_decl}")
    for r in doc.relators:
        lines.append("relator " + format_expr(r))
    for c in doc.checks:
        lines.append("check " + c.kind)
    return "\n".join(lines) + "\n"


def format_expr(node):
    if isinstance(node, GenNode):
        return node.name
    if isinstance(node, BracketNode):
        return f"[{format_expr(node.left)}, {format_expr(node.right)}]"
    if isinstance(node, ScaleNode):
        scalar = str(node.num) if node.den == 1 else f"{node.num}/{node.den}"
        inner = format_expr(node.node)
        if isinstance(node.node, SumNode):
            inner = f"({inner})"
        return f"{scalar}*{inner}"
    if isinstance(node, SumNode):
        if node.terms and node.terms[0][0] < 0:
            raise ValueError("the grammar has no form for a leading negative term")
        parts = []
        for i, (sign, term) in enumerate(node.terms):
            text = format_expr(term)
            parts.append(text if i == 0 else ("+ " if sign > 0 else "- ") + text)
        return " ".join(parts)
    raise TypeError(f"unknown node {node!r}")


def evaluate_expr(node, ctx):
    """Evaluate an expression node to a LieElement of the context."""
    if isinstance(node, GenNode):
        try:
            index = ctx.generators.index(node.name)
        except Exception:
            raise ParseError(f"unknown generator {node.name!r}",
                             node.line, node.col) from None
        return LieElement.generator(ctx, index)
    if isinstance(node, BracketNode):
        return evaluate_expr(node.left, ctx).bracket(evaluate_expr(node.right, ctx))
    if isinstance(node, ScaleNode):
        scalar = ctx.field.parse(f"{node.num}/{node.den}" if node.den != 1
                                 else str(node.num))
        return evaluate_expr(node.node, ctx).scale(scalar)
    if isinstance(node, SumNode):
        total = LieElement.zero(ctx)
        for sign, term in node.terms:
            value = evaluate_expr(term, ctx)
            total = total + (value if sign > 0 else -value)
        return total
    raise TypeError(f"unknown node {node!r}")


def build_context(doc, field_override=None, degree_override=None):
    field = field_override or doc.field_decl or QQ
    degree = degree_override or doc.truncate_decl
    generators = GeneratorSet(doc.generator_decl)
    return AlgebraContext(generators, field, degree)
