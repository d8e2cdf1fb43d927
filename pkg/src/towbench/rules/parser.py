"""Recursive-descent parser for the query-rule expression language.

Grammar (binding from loosest to tightest: OR, AND, comparisons, + -, * /,
then the unary operators NOT and minus at the top):

    rule   := or
    or     := and (OR and)*
    and    := cmp (AND cmp)*
    cmp    := sum (('<'|'<='|'='|'!='|'>'|'>=') sum)?
    sum    := term (('+'|'-') term)*
    term   := factor (('*'|'/') factor)*
    factor := 'NOT' factor | '-' factor | NUMBER | ns '.' attr | '(' rule ')'

Every token carries its line and column; all diagnostics point at source
positions. Attribute references resolve against the schema catalog during
parsing, with namespace legality depending on the rule class. A type check
runs after parsing: comparisons and arithmetic demand numeric operands,
the boolean connectives demand boolean ones, and the whole rule must be
boolean.
"""

from __future__ import annotations

from dataclasses import dataclass

from ..store.schema import CLASS_NAMESPACES, RULE_CLASSES
from .ast import (
    Arith,
    Attr,
    BOOL,
    BoolOp,
    Cmp,
    Neg,
    Node,
    Not,
    Num,
    NUM,
    Span,
    node_type,
    pretty,
)
from .catalog import SchemaCatalog, default_catalog


class RuleError(ValueError):
    """Any rule problem, with a source position and an error kind."""

    def __init__(self, kind: str, message: str, line: int, col: int):
        super().__init__(f"{message} (line {line}, column {col})")
        self.kind = kind
        self.message = message
        self.line = line
        self.col = col

    def to_diagnostic(self) -> "Diagnostic":
        return Diagnostic(self.kind, self.message, self.line, self.col)


@dataclass(frozen=True)
class Diagnostic:
    kind: str
    message: str
    line: int
    col: int


@dataclass(frozen=True)
class QueryRule:
    rule_class: str
    expr: Node
    source_text: str

    def pretty(self) -> str:
        return pretty(self.expr)


_KEYWORDS = ("AND", "OR", "NOT")
_TWO_CHAR_OPS = ("<=", ">=", "!=")
_ONE_CHAR_OPS = "<>=+-*/()."


@dataclass(frozen=True)
class _Token:
    kind: str  # ident, number, op, keyword, eof
    text: str
    line: int
    col: int


def _tokenize(text: str) -> list[_Token]:
    tokens: list[_Token] = []
    line, col = 1, 1
    i = 0
    n = len(text)
    while i < n:
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
        if any(text.startswith(op, i) for op in _TWO_CHAR_OPS):
            tokens.append(_Token("op", text[i : i + 2], line, col))
            i += 2
            col += 2
            continue
        if ch in _ONE_CHAR_OPS:
            tokens.append(_Token("op", ch, line, col))
            i += 1
            col += 1
            continue
        if ch.isdigit():
            j = i
            seen_dot = False
            while j < n and (text[j].isdigit() or (text[j] == "." and not seen_dot)):
                if text[j] == ".":
                    # a dot not followed by a digit belongs to the next token
                    if j + 1 >= n or not text[j + 1].isdigit():
                        break
                    seen_dot = True
                j += 1
            tokens.append(_Token("number", text[i:j], line, col))
            col += j - i
            i = j
            continue
        if ch.isalpha() or ch == "_":
            j = i
            while j < n and (text[j].isalnum() or text[j] == "_"):
                j += 1
            word = text[i:j]
            kind = "keyword" if word in _KEYWORDS else "ident"
            tokens.append(_Token(kind, word, line, col))
            col += j - i
            i = j
            continue
        raise RuleError("lexical", f"unexpected character {ch!r}", line, col)
    tokens.append(_Token("eof", "", line, col))
    return tokens


class _Parser:
    def __init__(self, rule_class: str, tokens: list[_Token],
                 catalog: SchemaCatalog):
        self.rule_class = rule_class
        self.tokens = tokens
        self.pos = 0
        self.catalog = catalog
        self.namespaces = CLASS_NAMESPACES[rule_class]
        self.paren_stack: list[_Token] = []

    def peek(self) -> _Token:
        return self.tokens[self.pos]

    def advance(self) -> _Token:
        tok = self.tokens[self.pos]
        self.pos += 1
        return tok

    def expect_op(self, op: str) -> _Token:
        tok = self.peek()
        if tok.kind == "op" and tok.text == op:
            return self.advance()
        raise RuleError(
            "syntax", f"expected {op!r}, found {tok.text or 'end of rule'!r}",
            tok.line, tok.col,
        )

    # -- grammar --------------------------------------------------------

    def parse(self) -> Node:
        node = self.or_expr()
        tok = self.peek()
        if tok.kind != "eof":
            if tok.kind == "op" and tok.text == ")":
                raise RuleError("parens", "unbalanced parentheses: unexpected ')'",
                                tok.line, tok.col)
            raise RuleError("syntax", f"unexpected {tok.text!r}", tok.line, tok.col)
        return node

    def or_expr(self) -> Node:
        node = self.and_expr()
        while self.peek().kind == "keyword" and self.peek().text == "OR":
            tok = self.advance()
            right = self.and_expr()
            node = BoolOp(Span(tok.line, tok.col), "OR", node, right)
        return node

    def and_expr(self) -> Node:
        node = self.cmp_expr()
        while self.peek().kind == "keyword" and self.peek().text == "AND":
            tok = self.advance()
            right = self.cmp_expr()
            node = BoolOp(Span(tok.line, tok.col), "AND", node, right)
        return node

    def cmp_expr(self) -> Node:
        node = self.sum_expr()
        tok = self.peek()
        if tok.kind == "op" and tok.text in ("<", "<=", "=", "!=", ">", ">="):
            self.advance()
            right = self.sum_expr()
            return Cmp(Span(tok.line, tok.col), tok.text, node, right)
        return node

    def sum_expr(self) -> Node:
        node = self.term_expr()
        while self.peek().kind == "op" and self.peek().text in "+-":
            tok = self.advance()
            right = self.term_expr()
            node = Arith(Span(tok.line, tok.col), tok.text, node, right)
        return node

    def term_expr(self) -> Node:
        node = self.factor()
        while self.peek().kind == "op" and self.peek().text in "*/":
            tok = self.advance()
            right = self.factor()
            node = Arith(Span(tok.line, tok.col), tok.text, node, right)
        return node

    def factor(self) -> Node:
        tok = self.peek()
        if tok.kind == "keyword" and tok.text == "NOT":
            self.advance()
            return Not(Span(tok.line, tok.col), self.factor())
        if tok.kind == "op" and tok.text == "-":
            self.advance()
            return Neg(Span(tok.line, tok.col), self.factor())
        if tok.kind == "number":
            self.advance()
            is_int = "." not in tok.text
            return Num(Span(tok.line, tok.col), float(tok.text), is_int)
        if tok.kind == "op" and tok.text == "(":
            self.advance()
            self.paren_stack.append(tok)
            node = self.or_expr()
            closing = self.peek()
            if not (closing.kind == "op" and closing.text == ")"):
                raise RuleError(
                    "parens",
                    "unbalanced parentheses: missing ')' for '(' at "
                    f"line {tok.line}, column {tok.col}",
                    closing.line, closing.col,
                )
            self.advance()
            self.paren_stack.pop()
            return node
        if tok.kind == "ident":
            return self.attribute()
        if tok.kind == "keyword":
            raise RuleError("syntax", f"unexpected keyword {tok.text}",
                            tok.line, tok.col)
        raise RuleError(
            "syntax",
            f"expected a number, attribute, or '(', found "
            f"{tok.text or 'end of rule'!r}",
            tok.line, tok.col,
        )

    def attribute(self) -> Node:
        ns_tok = self.advance()
        dot = self.peek()
        if not (dot.kind == "op" and dot.text == "."):
            raise RuleError(
                "syntax",
                f"expected '.' after namespace {ns_tok.text!r}",
                dot.line, dot.col,
            )
        self.advance()
        name_tok = self.peek()
        if name_tok.kind not in ("ident", "keyword"):
            raise RuleError("syntax", "expected an attribute name after '.'",
                            name_tok.line, name_tok.col)
        self.advance()

        namespace, name = ns_tok.text, name_tok.text
        if namespace not in self.catalog.namespaces:
            raise RuleError(
                "namespace", f"unknown namespace {namespace!r}",
                ns_tok.line, ns_tok.col,
            )
        if namespace not in self.namespaces:
            raise RuleError(
                "namespace",
                f"namespace {namespace!r} is not allowed in "
                f"{self.rule_class} rules (allowed: {', '.join(self.namespaces)})",
                ns_tok.line, ns_tok.col,
            )
        canonical = self.catalog.resolve(namespace, name)
        if canonical is None:
            suggestion = self.catalog.suggest(namespace, name)
            hint = f"; did you mean {suggestion!r}?" if suggestion else ""
            raise RuleError(
                "unknownAttribute",
                f"unknown attribute {namespace}.{name}{hint}",
                name_tok.line, name_tok.col,
            )
        return Attr(Span(ns_tok.line, ns_tok.col), namespace, name, canonical)


def _type_check(node: Node) -> None:
    if isinstance(node, (Num, Attr)):
        return
    if isinstance(node, Neg):
        _type_check(node.operand)
        if node_type(node.operand) != NUM:
            raise RuleError("type", "'-' needs a numeric operand",
                            node.span.line, node.span.col)
        return
    if isinstance(node, Not):
        _type_check(node.operand)
        if node_type(node.operand) != BOOL:
            raise RuleError(
                "type", "NOT needs a boolean operand (a comparison)",
                node.span.line, node.span.col,
            )
        return
    if isinstance(node, Arith):
        _type_check(node.left)
        _type_check(node.right)
        for side in (node.left, node.right):
            if node_type(side) != NUM:
                raise RuleError(
                    "type", f"'{node.op}' needs numeric operands",
                    node.span.line, node.span.col,
                )
        return
    if isinstance(node, Cmp):
        _type_check(node.left)
        _type_check(node.right)
        for side in (node.left, node.right):
            if node_type(side) != NUM:
                raise RuleError(
                    "type",
                    f"comparison {node.op!r} needs numeric operands, "
                    "not a boolean expression",
                    node.span.line, node.span.col,
                )
        return
    if isinstance(node, BoolOp):
        _type_check(node.left)
        _type_check(node.right)
        for side in (node.left, node.right):
            if node_type(side) != BOOL:
                raise RuleError(
                    "type",
                    f"{node.op} needs boolean operands (comparisons)",
                    node.span.line, node.span.col,
                )
        return
    raise TypeError(f"unknown node {node!r}")


def parse_rule(
    rule_class: str, text: str, catalog: SchemaCatalog | None = None
) -> QueryRule:
    """Parse and validate one rule expression. Raises RuleError with a
    line/column position on any problem."""
    if rule_class not in RULE_CLASSES:
        raise RuleError(
            "class",
            f"unknown rule class {rule_class!r} "
            f"(expected one of {', '.join(RULE_CLASSES)})",
            1, 1,
        )
    catalog = catalog or default_catalog()
    tokens = _tokenize(text)
    if tokens[0].kind == "eof":
        raise RuleError("syntax", "empty rule", 1, 1)
    parser = _Parser(rule_class, tokens, catalog)
    node = parser.parse()
    _type_check(node)
    if node_type(node) != BOOL:
        raise RuleError(
            "type", "a rule must be a boolean expression (use a comparison)",
            node.span.line, node.span.col,
        )
    return QueryRule(rule_class, node, text)


def validate_against_catalog(
    rule: QueryRule, catalog: SchemaCatalog
) -> list[Diagnostic]:
    """Re-check name resolution after a catalog change. Returns diagnostics
    instead of raising; an empty list means the rule is valid."""
    from .ast import attributes

    diagnostics: list[Diagnostic] = []
    allowed = CLASS_NAMESPACES[rule.rule_class]
    for attr in attributes(rule.expr):
        if attr.namespace not in catalog.namespaces:
            diagnostics.append(
                Diagnostic("namespace", f"unknown namespace {attr.namespace!r}",
                           attr.span.line, attr.span.col)
            )
            continue
        if attr.namespace not in allowed:
            diagnostics.append(
                Diagnostic(
                    "namespace",
                    f"namespace {attr.namespace!r} is not allowed in "
                    f"{rule.rule_class} rules",
                    attr.span.line, attr.span.col,
                )
            )
            continue
        if catalog.resolve(attr.namespace, attr.name) is None:
            suggestion = catalog.suggest(attr.namespace, attr.name)
            hint = f"; did you mean {suggestion!r}?" if suggestion else ""
            diagnostics.append(
                Diagnostic(
                    "unknownAttribute",
                    f"unknown attribute {attr.namespace}.{attr.name}{hint}",
                    attr.span.line, attr.span.col,
                )
            )
    return diagnostics
