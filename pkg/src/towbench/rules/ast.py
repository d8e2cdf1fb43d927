"""Typed AST for query rules.

Nodes compare structurally (spans ignored), which is what the
print-then-reparse identity property is stated over. Attribute references
keep both the spelling the user wrote and the canonical column it resolved
to; printing always emits the canonical name.
"""

from __future__ import annotations

from dataclasses import dataclass, field

BOOL = "bool"
NUM = "num"


@dataclass(frozen=True)
class Span:
    line: int
    col: int


@dataclass(frozen=True, eq=False)
class Node:
    span: Span = field(compare=False)

    def __eq__(self, other):  # pragma: no cover - overridden by subclasses
        return NotImplemented


@dataclass(frozen=True, eq=False)
class Num(Node):
    value: float
    is_int: bool

    def __eq__(self, other):
        return (
            isinstance(other, Num)
            and self.value == other.value
            and self.is_int == other.is_int
        )

    def __hash__(self):
        return hash(("num", self.value, self.is_int))


@dataclass(frozen=True, eq=False)
class Attr(Node):
    namespace: str
    name: str  # spelling as written (may be an alias)
    canonical: str  # resolved canonical column

    def __eq__(self, other):
        return (
            isinstance(other, Attr)
            and self.namespace == other.namespace
            and self.canonical == other.canonical
        )

    def __hash__(self):
        return hash(("attr", self.namespace, self.canonical))


@dataclass(frozen=True, eq=False)
class Neg(Node):
    operand: Node

    def __eq__(self, other):
        return isinstance(other, Neg) and self.operand == other.operand

    def __hash__(self):
        return hash(("neg", self.operand))


@dataclass(frozen=True, eq=False)
class Not(Node):
    operand: Node

    def __eq__(self, other):
        return isinstance(other, Not) and self.operand == other.operand

    def __hash__(self):
        return hash(("not", self.operand))


@dataclass(frozen=True, eq=False)
class Arith(Node):
    op: str  # + - * /
    left: Node
    right: Node

    def __eq__(self, other):
        return (
            isinstance(other, Arith)
            and self.op == other.op
            and self.left == other.left
            and self.right == other.right
        )

    def __hash__(self):
        return hash(("arith", self.op, self.left, self.right))


@dataclass(frozen=True, eq=False)
class Cmp(Node):
    op: str  # < <= = != > >=
    left: Node
    right: Node

    def __eq__(self, other):
        return (
            isinstance(other, Cmp)
            and self.op == other.op
            and self.left == other.left
            and self.right == other.right
        )

    def __hash__(self):
        return hash(("cmp", self.op, self.left, self.right))


@dataclass(frozen=True, eq=False)
class BoolOp(Node):
    op: str  # AND OR
    left: Node
    right: Node

    def __eq__(self, other):
        return (
            isinstance(other, BoolOp)
            and self.op == other.op
            and self.left == other.left
            and self.right == other.right
        )

    def __hash__(self):
        return hash(("boolop", self.op, self.left, self.right))


def node_type(node: Node) -> str:
    """Static type of a node: BOOL or NUM."""
    if isinstance(node, (Num, Attr, Neg, Arith)):
        return NUM
    return BOOL


def attributes(node: Node) -> list:
    """All attribute references, left-to-right."""
    if isinstance(node, Attr):
        return [node]
    if isinstance(node, (Neg, Not)):
        return attributes(node.operand)
    if isinstance(node, (Arith, Cmp, BoolOp)):
        return attributes(node.left) + attributes(node.right)
    return []


def _level(node: Node) -> int:
    if isinstance(node, BoolOp):
        return 1 if node.op == "OR" else 2
    if isinstance(node, Cmp):
        return 3
    if isinstance(node, Arith):
        return 4 if node.op in "+-" else 5
    if isinstance(node, (Neg, Not)):
        return 6
    return 7


def pretty(node: Node) -> str:
    """Canonical text: one space around binary operators, parentheses only
    where precedence demands them, canonical attribute names, and numeric
    literals printed with their original int/float kind."""
    return _print(node)


def _print(node: Node) -> str:
    if isinstance(node, Num):
        if node.is_int:
            return str(int(node.value))
        return repr(node.value)
    if isinstance(node, Attr):
        return f"{node.namespace}.{node.canonical}"
    if isinstance(node, Neg):
        return f"-{_wrap(node.operand, 7)}"
    if isinstance(node, Not):
        inner = node.operand
        if isinstance(inner, Not):
            return f"NOT {_print(inner)}"
        return f"NOT ({_print(inner)})"
    if isinstance(node, Arith):
        lvl = _level(node)
        left = _wrap(node.left, lvl)
        right = _wrap(node.right, lvl, strict=True)
        return f"{left} {node.op} {right}"
    if isinstance(node, Cmp):
        return f"{_wrap(node.left, 4)} {node.op} {_wrap(node.right, 4)}"
    if isinstance(node, BoolOp):
        lvl = _level(node)
        left = _wrap(node.left, lvl)
        right = _wrap(node.right, lvl, strict=True)
        return f"{left} {node.op} {right}"
    raise TypeError(f"unknown node {node!r}")


def _wrap(node: Node, min_level: int, strict: bool = False) -> str:
    lvl = _level(node)
    need = lvl < min_level or (strict and lvl == min_level)
    text = _print(node)
    return f"({text})" if need else text
