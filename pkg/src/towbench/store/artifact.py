"""Episode artifact files.

A recorded game is one line-delimited file: a header line carrying the
schema version and config hash, then per decision point a decision record,
followed by one action/node/winprob record per tree node, and finally an
end record with the outcome. Node and action ids are artifact-local and
stable across write/read, which keeps ingestion deterministic and
idempotent (the episode id is the content hash of the file bytes).
"""

from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from ..game import Outcome, PurchaseAction, state_to_row
from ..planner import SearchTree
from .schema import SCHEMA_VERSION


class ArtifactError(ValueError):
    """Malformed episode artifact."""


@dataclass
class NodeRecord:
    node_id: int
    depth: int
    parent_id: int | None
    action_id: int | None
    backed_up_value: float
    state_row: np.ndarray
    win_probabilities: np.ndarray | None = None


@dataclass
class DecisionRecord:
    decision_idx: int
    chosen_action: tuple[int, int, int, int]  # lane, m, b, i
    widths: tuple[tuple[int, int], tuple[int, int]]
    nodes: dict[int, NodeRecord] = field(default_factory=dict)
    actions: dict[int, tuple[int, int, np.ndarray]] = field(default_factory=dict)
    # actions map: id -> (parent_node_id, id, 8-column row)


@dataclass
class EpisodeArtifact:
    header: dict
    decisions: list[DecisionRecord]
    is_win: bool
    wave_count: int
    outcome: dict
    content_hash: str


def action_pair_row(friendly: PurchaseAction, enemy: PurchaseAction) -> list[int]:
    """The 8 action columns: friendly purchases + lane, then enemy's."""
    return [
        friendly.purchases[0],
        friendly.purchases[1],
        friendly.purchases[2],
        friendly.lane,
        enemy.purchases[0],
        enemy.purchases[1],
        enemy.purchases[2],
        enemy.lane,
    ]


def tree_lines(tree: SearchTree, decision_idx: int) -> list[str]:
    """Serialize one search tree into artifact lines."""
    chosen = tree.chosen_action
    lines = [
        json.dumps(
            {
                "t": "decision",
                "d": decision_idx,
                "chosen": [chosen.lane, *chosen.purchases],
                "widths": [list(w) for w in tree.prune_widths],
            },
            separators=(",", ":"),
        )
    ]
    action_id = 0
    for node_id in sorted(tree.nodes):
        node = tree.nodes[node_id]
        aid = None
        if node.parent_action_pair is not None:
            aid = action_id
            action_id += 1
            lines.append(
                json.dumps(
                    {
                        "t": "action",
                        "d": decision_idx,
                        "id": aid,
                        "parentNode": node.parent_id,
                        "a": action_pair_row(*node.parent_action_pair),
                    },
                    separators=(",", ":"),
                )
            )
        lines.append(
            json.dumps(
                {
                    "t": "node",
                    "d": decision_idx,
                    "id": node.node_id,
                    "depth": node.depth,
                    "parent": node.parent_id,
                    "action": aid,
                    "v": node.backed_up_value,
                    "s": [int(x) for x in state_to_row(node.state)],
                },
                separators=(",", ":"),
            )
        )
        lines.append(
            json.dumps(
                {
                    "t": "winprob",
                    "d": decision_idx,
                    "node": node.node_id,
                    "p": [float(x) for x in node.win_probabilities],
                },
                separators=(",", ":"),
            )
        )
    return lines


def write_episode(
    path: str | Path,
    trees: list[SearchTree],
    outcome: Outcome,
    config_hash: str,
    bundle_desc: str,
    seed: int | None = None,
) -> str:
    """Write an episode artifact; returns its content hash (the episode id)."""
    lines = [
        json.dumps(
            {
                "t": "header",
                "schemaVersion": SCHEMA_VERSION,
                "configHash": config_hash,
                "bundle": bundle_desc,
                "seed": seed,
            },
            separators=(",", ":"),
        )
    ]
    for decision_idx, tree in enumerate(trees):
        lines.extend(tree_lines(tree, decision_idx))
    lines.append(
        json.dumps(
            {
                "t": "end",
                "isWin": outcome.winner == 0,
                "waveCount": len(trees),
                "outcome": {
                    "winner": outcome.winner,
                    "condition": outcome.condition,
                    "reward": list(outcome.reward_vector),
                },
            },
            separators=(",", ":"),
        )
    )
    payload = "\n".join(lines) + "\n"
    Path(path).write_text(payload)
    return content_hash_of(payload.encode())


def content_hash_of(data: bytes) -> str:
    return hashlib.sha256(data).hexdigest()[:16]


def read_episode(path: str | Path) -> EpisodeArtifact:
    data = Path(path).read_bytes()
    return parse_episode(data)


def parse_episode(data: bytes) -> EpisodeArtifact:
    """Parse and structurally validate an artifact."""
    lines = data.decode().splitlines()
    if not lines:
        raise ArtifactError("empty artifact")
    header = json.loads(lines[0])
    if header.get("t") != "header":
        raise ArtifactError("first line must be the header record")
    if header.get("schemaVersion") != SCHEMA_VERSION:
        raise ArtifactError(
            f"unsupported artifact schema version {header.get('schemaVersion')}"
        )

    decisions: dict[int, DecisionRecord] = {}
    is_win = None
    wave_count = 0
    outcome: dict = {}
    for raw in lines[1:]:
        if not raw.strip():
            continue
        rec = json.loads(raw)
        kind = rec.get("t")
        if kind == "decision":
            d = rec["d"]
            decisions[d] = DecisionRecord(
                decision_idx=d,
                chosen_action=tuple(rec["chosen"]),
                widths=tuple(tuple(w) for w in rec["widths"]),
            )
        elif kind == "node":
            d = decisions.get(rec["d"])
            if d is None:
                raise ArtifactError(
                    f"node {rec.get('id')} appears before its decision record"
                )
            state_row = np.array(rec["s"], dtype=np.int64)
            if state_row.shape != (67,):
                raise ArtifactError(f"node {rec['id']}: state row must have 67 values")
            d.nodes[rec["id"]] = NodeRecord(
                node_id=rec["id"],
                depth=rec["depth"],
                parent_id=rec["parent"],
                action_id=rec["action"],
                backed_up_value=rec["v"],
                state_row=state_row,
            )
        elif kind == "winprob":
            d = decisions.get(rec["d"])
            node = d.nodes.get(rec["node"]) if d else None
            if node is None:
                raise ArtifactError(
                    f"winprob record for unknown node {rec.get('node')}"
                )
            node.win_probabilities = np.array(rec["p"], dtype=np.float64)
        elif kind == "action":
            d = decisions.get(rec["d"])
            if d is None:
                raise ArtifactError(
                    f"action {rec.get('id')} appears before its decision record"
                )
            d.actions[rec["id"]] = (
                rec["parentNode"],
                rec["id"],
                np.array(rec["a"], dtype=np.int64),
            )
        elif kind == "end":
            is_win = rec["isWin"]
            wave_count = rec["waveCount"]
            outcome = rec.get("outcome", {})
        else:
            raise ArtifactError(f"unknown record kind {kind!r}")

    if is_win is None:
        raise ArtifactError("missing end record")

    ordered = [decisions[d] for d in sorted(decisions)]
    _validate_structure(ordered)
    return EpisodeArtifact(
        header=header,
        decisions=ordered,
        is_win=bool(is_win),
        wave_count=int(wave_count),
        outcome=outcome,
        content_hash=content_hash_of(data),
    )


def _validate_structure(decisions: list[DecisionRecord]) -> None:
    for dec in decisions:
        roots = [n for n in dec.nodes.values() if n.depth == 0]
        if len(roots) != 1:
            raise ArtifactError(
                f"decision {dec.decision_idx}: expected exactly one root node, "
                f"found {len(roots)}"
            )
        if roots[0].parent_id is not None or roots[0].action_id is not None:
            raise ArtifactError(
                f"decision {dec.decision_idx}: root node {roots[0].node_id} "
                "must have no parent"
            )
        for node in dec.nodes.values():
            if node.win_probabilities is None:
                raise ArtifactError(
                    f"decision {dec.decision_idx}: node {node.node_id} "
                    "missing winprob record"
                )
            if node.depth > 2:
                raise ArtifactError(
                    f"decision {dec.decision_idx}: node {node.node_id} "
                    f"exceeds depth 2"
                )
            if node.depth == 0:
                continue
            parent = dec.nodes.get(node.parent_id)
            if parent is None:
                raise ArtifactError(
                    f"decision {dec.decision_idx}: node {node.node_id} "
                    f"references missing parent {node.parent_id}"
                )
            if node.depth != parent.depth + 1:
                raise ArtifactError(
                    f"decision {dec.decision_idx}: node {node.node_id} depth "
                    f"{node.depth} does not follow parent depth {parent.depth}"
                )
            action = dec.actions.get(node.action_id)
            if action is None:
                raise ArtifactError(
                    f"decision {dec.decision_idx}: node {node.node_id} "
                    f"references missing action {node.action_id}"
                )
            if action[0] != node.parent_id:
                raise ArtifactError(
                    f"decision {dec.decision_idx}: node {node.node_id} action "
                    "parent mismatch"
                )
