"""Minimax planner producing auditable search trees."""

from .search import (
    DEFAULT_WIDTHS,
    PlannerError,
    SearchTree,
    TreeNode,
    build_tree,
    select_action,
)

__all__ = [
    "DEFAULT_WIDTHS",
    "PlannerError",
    "SearchTree",
    "TreeNode",
    "build_tree",
    "select_action",
]
