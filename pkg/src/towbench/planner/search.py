"""Depth-2 minimax search over joint purchase actions.

The tree is the product of ranked action prefixes: at the root the top 20
friendly and top 10 enemy actions form up to 200 joint children, and each
non-terminal child expands with widths (5, 3) into up to 15 grandchildren.
Leaves are valued by the friendly scalar of the value model's decomposed
output, values back up as max over friendly actions of min over enemy
actions, and the argmax breaks ties toward the lowest-ranked (and therefore
lowest enumeration index) friendly action. Beyond the chosen action, the
whole tree is returned as an auditable artifact: every node carries its
predicted state and decomposed win probabilities.

Node ids are assigned in construction order: root, then all children in
rank order, then grandchildren grouped per child. A tree build is
sequential so ids are canonical; distinct decision points may build
concurrently.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from ..game import (
    ENEMY,
    FRIENDLY,
    AbstractState,
    PurchaseAction,
    action_from_row,
    is_terminal,
    state_to_row,
)
from ..models import ModelBundle

#: (root friendly, root enemy), (child friendly, child enemy) ranking widths.
DEFAULT_WIDTHS = ((20, 10), (5, 3))


class PlannerError(RuntimeError):
    """Tree construction failed; the message carries node context."""


@dataclass
class TreeNode:
    node_id: int
    depth: int
    state: AbstractState
    win_probabilities: np.ndarray
    parent_id: int | None = None
    parent_action_pair: tuple[PurchaseAction, PurchaseAction] | None = None
    children: list[int] = field(default_factory=list)
    backed_up_value: float = 0.0


@dataclass
class SearchTree:
    decision_index: int
    root_node_id: int
    nodes: dict[int, TreeNode]
    chosen_action: PurchaseAction
    prune_widths: tuple[tuple[int, int], tuple[int, int]]
    episode_id: str | None = None

    @property
    def root(self) -> TreeNode:
        return self.nodes[self.root_node_id]

    def node_count(self) -> int:
        return len(self.nodes)

    def transition_count(self) -> int:
        return len(self.nodes) - 1

    def max_depth(self) -> int:
        return max(n.depth for n in self.nodes.values())


def build_tree(
    bundle: ModelBundle,
    state: AbstractState,
    widths: tuple[tuple[int, int], tuple[int, int]] = DEFAULT_WIDTHS,
    decision_index: int = 0,
) -> SearchTree:
    """Construct the pruned minimax tree rooted at ``state``."""
    config = bundle.config
    if is_terminal(state, config):
        raise PlannerError("cannot plan from a terminal state")

    (root_f, root_e), (child_f, child_e) = widths
    try:
        rf = bundle.rank_action_rows(state, FRIENDLY, root_f)
        re = bundle.rank_action_rows(state, ENEMY, root_e)
    except Exception as exc:  # pragma: no cover - model failure path
        raise PlannerError(f"ranking failed at root: {exc}") from exc

    nodes: dict[int, TreeNode] = {}
    root = TreeNode(0, 0, state, np.zeros(4))
    nodes[0] = root
    next_id = 1

    # Depth-1 expansion: one batched transition call over all joint actions.
    nf, ne = len(rf), len(re)
    af_rows = np.repeat(rf, ne, axis=0)
    ae_rows = np.tile(re, (nf, 1))
    try:
        child_states, _ = bundle.predict_transition_batch(
            [state] * (nf * ne), af_rows, ae_rows
        )
    except Exception as exc:
        raise PlannerError(f"transition failed under root node 0: {exc}") from exc

    f_actions = [action_from_row(r) for r in rf]
    e_actions = [action_from_row(r) for r in re]
    children: list[TreeNode] = []
    for i in range(nf):
        for j in range(ne):
            child = TreeNode(
                next_id,
                1,
                child_states[i * ne + j],
                np.zeros(4),
                parent_id=0,
                parent_action_pair=(f_actions[i], e_actions[j]),
            )
            nodes[next_id] = child
            root.children.append(next_id)
            children.append(child)
            next_id += 1

    # Depth-2 expansion: rank each non-terminal child, then one batched
    # transition call over every grandchild job.
    jobs_states: list[AbstractState] = []
    jobs_af: list[np.ndarray] = []
    jobs_ae: list[np.ndarray] = []
    jobs_parent: list[int] = []
    jobs_actions: list[tuple[PurchaseAction, PurchaseAction]] = []
    for child in children:
        if is_terminal(child.state, config):
            continue
        try:
            cf = bundle.rank_action_rows(child.state, FRIENDLY, child_f)
            ce = bundle.rank_action_rows(child.state, ENEMY, child_e)
        except Exception as exc:
            raise PlannerError(
                f"ranking failed under node {child.node_id}: {exc}"
            ) from exc
        cf_actions = [action_from_row(r) for r in cf]
        ce_actions = [action_from_row(r) for r in ce]
        for i in range(len(cf)):
            for j in range(len(ce)):
                jobs_states.append(child.state)
                jobs_af.append(cf[i])
                jobs_ae.append(ce[j])
                jobs_parent.append(child.node_id)
                jobs_actions.append((cf_actions[i], ce_actions[j]))

    if jobs_states:
        try:
            grand_states, _ = bundle.predict_transition_batch(
                jobs_states, np.stack(jobs_af), np.stack(jobs_ae)
            )
        except Exception as exc:
            raise PlannerError(
                f"transition failed under node {jobs_parent[0]}: {exc}"
            ) from exc
        for k, gs in enumerate(grand_states):
            node = TreeNode(
                next_id,
                2,
                gs,
                np.zeros(4),
                parent_id=jobs_parent[k],
                parent_action_pair=jobs_actions[k],
            )
            nodes[next_id] = node
            nodes[jobs_parent[k]].children.append(next_id)
            next_id += 1

    # Annotate every node with the value model's decomposed output.
    ordered = [nodes[i] for i in range(next_id)]
    rows = np.stack([state_to_row(n.state) for n in ordered])
    values = bundle.value4_rows(rows)
    for node, v in zip(ordered, values):
        node.win_probabilities = np.asarray(v, dtype=np.float64)

    # Back up values: leaves score by the friendly scalar; internal nodes
    # take max over friendly actions of min over enemy actions.
    for grandchild_id in range(1 + nf * ne, next_id):
        node = nodes[grandchild_id]
        node.backed_up_value = bundle.scalar(node.win_probabilities, FRIENDLY)
    for child in children:
        if not child.children:
            child.backed_up_value = bundle.scalar(child.win_probabilities, FRIENDLY)
        else:
            child.backed_up_value = _max_min(nodes, child)

    best_value = -1.0
    best_index = 0
    for i in range(nf):
        group = children[i * ne : (i + 1) * ne]
        worst = min(c.backed_up_value for c in group)
        if worst > best_value:
            best_value = worst
            best_index = i
    root.backed_up_value = best_value
    chosen = f_actions[best_index]

    return SearchTree(
        decision_index=decision_index,
        root_node_id=0,
        nodes=nodes,
        chosen_action=chosen,
        prune_widths=widths,
    )


def _max_min(nodes: dict[int, TreeNode], parent: TreeNode) -> float:
    """Max over friendly actions of min over enemy actions of child values."""
    groups: dict[PurchaseAction, list[float]] = {}
    order: list[PurchaseAction] = []
    for cid in parent.children:
        child = nodes[cid]
        af = child.parent_action_pair[0]
        if af not in groups:
            groups[af] = []
            order.append(af)
        groups[af].append(child.backed_up_value)
    best = -1.0
    for af in order:
        worst = min(groups[af])
        if worst > best:
            best = worst
    return best


def select_action(
    bundle: ModelBundle,
    state: AbstractState,
    widths: tuple[tuple[int, int], tuple[int, int]] = DEFAULT_WIDTHS,
    decision_index: int = 0,
) -> tuple[PurchaseAction, SearchTree]:
    """Pick an action and return the full tree that justified it."""
    tree = build_tree(bundle, state, widths, decision_index)
    return tree.chosen_action, tree
