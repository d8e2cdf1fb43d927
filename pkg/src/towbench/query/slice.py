"""Tree slices: the subset of a decision point's search tree that explains
a report's matches.

The fragment keeps the full root-to-violation paths in expanded form and
collapses everything else: siblings of path nodes appear as compact stubs
(ids, health, win probabilities), and subtrees with no violations are
pruned entirely. A zero-violation decision point reduces to the root plus
its compact children.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from ..store.schema import ACTION_COLUMNS, STATE_COLUMNS, WINPROB_COLUMNS
from ..store.tables import TreeStore
from .engine import ViolationReport


@dataclass
class SliceNode:
    state_row_id: int
    node_id: int
    depth: int
    parent_state_row_id: int | None
    action_row_id: int | None
    highlighted: bool
    expanded: bool
    health: list[int]
    win_probabilities: list[float]
    backed_up_value: float
    attributes: dict | None = None  # full state row, expanded nodes only
    action: dict | None = None  # edge action columns, expanded nodes only

    def as_dict(self) -> dict:
        return {
            "stateRowId": self.state_row_id,
            "nodeId": self.node_id,
            "depth": self.depth,
            "parentStateRowId": self.parent_state_row_id,
            "actionRowId": self.action_row_id,
            "highlighted": self.highlighted,
            "expanded": self.expanded,
            "health": self.health,
            "winProbabilities": self.win_probabilities,
            "backedUpValue": self.backed_up_value,
            "attributes": self.attributes,
            "action": self.action,
        }


@dataclass
class TreeSlice:
    episode_id: str
    decision_idx: int
    root_state_row_id: int
    nodes: list[SliceNode] = field(default_factory=list)
    highlighted: list[int] = field(default_factory=list)
    total_nodes: int = 0
    pruned_nodes: int = 0
    chosen_action: list[int] | None = None

    def as_dict(self) -> dict:
        return {
            "episodeId": self.episode_id,
            "decisionIdx": self.decision_idx,
            "rootStateRowId": self.root_state_row_id,
            "nodes": [n.as_dict() for n in self.nodes],
            "highlighted": self.highlighted,
            "totalNodes": self.total_nodes,
            "prunedNodes": self.pruned_nodes,
            "chosenAction": self.chosen_action,
        }


def tree_slice(
    store: TreeStore, report: ViolationReport, decision_idx: int
) -> TreeSlice:
    episode_id = report.episode_id
    ep = store.episode_index(episode_id)
    rows = store.states_of(episode_id, decision_idx)
    if len(rows) == 0:
        raise KeyError(
            f"episode {episode_id} has no decision point {decision_idx}"
        )

    parent_action = store.state_parent_action.view()
    action_parent_state = store.action_parent_state.view()
    depth_col = store.state_depth.view()

    children: dict[int, list[int]] = {int(r): [] for r in rows}
    parent_of: dict[int, int | None] = {}
    root_row = None
    for r in rows.tolist():
        a = int(parent_action[r])
        if a < 0:
            parent_of[r] = None
            root_row = r
        else:
            p = int(action_parent_state[a])
            parent_of[r] = p
            children[p].append(r)

    highlighted = {
        m.output_state_id
        for m in report.matches
        if m.output_state_id in children  # restrict to this decision point
    }

    # expanded set: every highlighted node plus all its ancestors, and the root
    expanded: set[int] = {root_row}
    for h in highlighted:
        node = h
        while node is not None:
            expanded.add(node)
            node = parent_of[node]

    # included set: expanded nodes plus compact stubs for their children
    included: set[int] = set(expanded)
    for node in list(expanded):
        included.update(children[node])

    attrs = store.state_attrs.view()
    winprobs = store.winprob.view()
    backed = store.state_backed_up.view()
    node_ids = store.state_node_id.view()
    action_rows = store.action_rows.view()

    nodes = []
    for r in sorted(included):
        is_expanded = r in expanded
        row_attrs = attrs[r]
        health = [int(v) for v in row_attrs[0:4]]
        action_id = int(parent_action[r])
        payload = None
        action_payload = None
        if is_expanded:
            payload = {
                name: int(v) for name, v in zip(STATE_COLUMNS, row_attrs)
            }
            payload.update(
                {
                    name: float(v)
                    for name, v in zip(WINPROB_COLUMNS, winprobs[r])
                }
            )
        if action_id >= 0 and (is_expanded or r in highlighted):
            action_payload = {
                name: int(v)
                for name, v in zip(ACTION_COLUMNS, action_rows[action_id])
            }
        nodes.append(
            SliceNode(
                state_row_id=int(r),
                node_id=int(node_ids[r]),
                depth=int(depth_col[r]),
                parent_state_row_id=parent_of[r],
                action_row_id=None if action_id < 0 else action_id,
                highlighted=r in highlighted,
                expanded=is_expanded,
                health=health,
                win_probabilities=[float(v) for v in winprobs[r]],
                backed_up_value=float(backed[r]),
                attributes=payload,
                action=action_payload,
            )
        )

    meta = store.decision_meta.get((ep, decision_idx), {})
    return TreeSlice(
        episode_id=episode_id,
        decision_idx=decision_idx,
        root_state_row_id=root_row,
        nodes=nodes,
        highlighted=sorted(highlighted),
        total_nodes=int(len(rows)),
        pruned_nodes=int(len(rows) - len(included)),
        chosen_action=meta.get("chosen"),
    )
