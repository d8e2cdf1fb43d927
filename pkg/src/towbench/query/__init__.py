"""Rule evaluation engine and tree-slice explanations."""

from .engine import (
    MatchIds,
    Scope,
    ViolationReport,
    compile_rule,
    evaluate_rule,
    evaluate_static,
    evaluate_symmetry,
    evaluate_transition,
)
from .slice import SliceNode, TreeSlice, tree_slice

__all__ = [
    "MatchIds",
    "Scope",
    "ViolationReport",
    "compile_rule",
    "evaluate_rule",
    "evaluate_static",
    "evaluate_symmetry",
    "evaluate_transition",
    "SliceNode",
    "TreeSlice",
    "tree_slice",
]
