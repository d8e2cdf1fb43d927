"""Random query-rule generator, used for print/parse round-trips and for
engine-vs-oracle equivalence sweeps. Generates type-correct ASTs straight
from the grammar."""

from __future__ import annotations

import numpy as np

from towbench.rules.ast import Arith, Attr, BoolOp, Cmp, Neg, Not, Num, Span
from towbench.store.schema import CLASS_NAMESPACES, NAMESPACE_COLUMNS, RULE_CLASSES

_SPAN = Span(0, 0)
_CMP_OPS = ("<", "<=", "=", "!=", ">", ">=")
_ARITH_OPS = ("+", "-", "*", "/")


def _random_number(rng: np.random.Generator) -> Num:
    if rng.random() < 0.5:
        return Num(_SPAN, float(int(rng.integers(0, 2001))), True)
    value = round(float(rng.uniform(0, 100)), 2)
    return Num(_SPAN, value, False)


def _random_attr(rng: np.random.Generator, namespaces: tuple[str, ...]) -> Attr:
    ns = namespaces[int(rng.integers(len(namespaces)))]
    columns = NAMESPACE_COLUMNS[ns]
    name = columns[int(rng.integers(len(columns)))]
    return Attr(_SPAN, ns, name, name)


def _num_expr(rng, namespaces, depth: int):
    roll = rng.random()
    if depth >= 3 or roll < 0.45:
        return _random_attr(rng, namespaces)
    if roll < 0.65:
        return _random_number(rng)
    if roll < 0.72:
        return Neg(_SPAN, _num_expr(rng, namespaces, depth + 1))
    op = _ARITH_OPS[int(rng.integers(len(_ARITH_OPS)))]
    return Arith(
        _SPAN, op,
        _num_expr(rng, namespaces, depth + 1),
        _num_expr(rng, namespaces, depth + 1),
    )


def _bool_expr(rng, namespaces, depth: int):
    roll = rng.random()
    if depth >= 3 or roll < 0.55:
        op = _CMP_OPS[int(rng.integers(len(_CMP_OPS)))]
        return Cmp(
            _SPAN, op,
            _num_expr(rng, namespaces, depth + 1),
            _num_expr(rng, namespaces, depth + 1),
        )
    if roll < 0.65:
        return Not(_SPAN, _bool_expr(rng, namespaces, depth + 1))
    op = "AND" if rng.random() < 0.5 else "OR"
    return BoolOp(
        _SPAN, op,
        _bool_expr(rng, namespaces, depth + 1),
        _bool_expr(rng, namespaces, depth + 1),
    )


def random_rule_ast(rng: np.random.Generator, rule_class: str | None = None):
    """Returns (rule_class, boolean AST). Attribute references respect the
    class's namespace rules."""
    if rule_class is None:
        rule_class = RULE_CLASSES[int(rng.integers(len(RULE_CLASSES)))]
    namespaces = CLASS_NAMESPACES[rule_class]
    return rule_class, _bool_expr(rng, namespaces, 0)
