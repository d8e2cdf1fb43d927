"""In-memory columnar store for episodes, search-tree rows, and
counterfactual twins.

Writes are append-only and grouped per episode; readers work against sealed
numpy column views, so query evaluation never observes a partial episode.
Row ids are global integer indexes, assigned in artifact order, which makes
every derived structure (transitions, counterfactual joins, reports)
deterministic.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .artifact import EpisodeArtifact, parse_episode
from .schema import (
    ACTION_COLUMNS,
    SCHEMA_VERSION,
    STATE_COLUMNS,
    WINPROB_COLUMNS,
)

TRANSFORMS = ("flip", "reverse")


class StoreError(ValueError):
    pass


class NotFoundError(KeyError):
    pass


@dataclass
class EpisodeInfo:
    episode_id: str
    is_win: bool
    wave_count: int
    config_hash: str
    decision_count: int


class _Blocks:
    """Append-only array column with a cached concatenated view."""

    def __init__(self, width: int | None, dtype):
        self.width = width
        self.dtype = dtype
        self._blocks: list[np.ndarray] = []
        self._cache: np.ndarray | None = None
        self._length = 0

    def append(self, block: np.ndarray) -> None:
        shape = (len(block), self.width) if self.width else (len(block),)
        arr = np.asarray(block, dtype=self.dtype).reshape(shape)
        self._blocks.append(arr)
        self._cache = None
        self._length += len(arr)

    def view(self) -> np.ndarray:
        if self._cache is None:
            if not self._blocks:
                shape = (0, self.width) if self.width else (0,)
                self._cache = np.empty(shape, dtype=self.dtype)
            elif len(self._blocks) == 1:
                self._cache = self._blocks[0]
            else:
                self._cache = np.concatenate(self._blocks)
                self._blocks = [self._cache]
        return self._cache

    def __len__(self) -> int:
        return self._length


class _CfTable:
    """Counterfactual twins for one transform."""

    def __init__(self):
        self.state_attrs = _Blocks(len(STATE_COLUMNS), np.int64)
        self.state_origin = _Blocks(None, np.int64)  # origin output-state row
        self.winprob = _Blocks(len(WINPROB_COLUMNS), np.float64)
        self.winprob_origin = _Blocks(None, np.int64)
        self.action_rows = _Blocks(len(ACTION_COLUMNS), np.int64)
        self.action_origin = _Blocks(None, np.int64)
        # join arrays aligned with transition indexes
        self.transition_rows = _Blocks(None, np.int64)
        self.cf_state_rows = _Blocks(None, np.int64)
        self.episodes_done: set[int] = set()


class TreeStore:
    """Relational store over Episodes, States, Actions, and WinProbability
    tables, with flip/reverse counterfactual twins."""

    def __init__(self):
        self.episodes: list[EpisodeInfo] = []
        self._episode_index: dict[str, int] = {}

        self.state_attrs = _Blocks(len(STATE_COLUMNS), np.int64)
        self.state_episode = _Blocks(None, np.int64)
        self.state_decision = _Blocks(None, np.int64)
        self.state_is_root = _Blocks(None, np.int64)
        self.state_depth = _Blocks(None, np.int64)
        self.state_parent_action = _Blocks(None, np.int64)  # -1 for roots
        self.state_model_predicted = _Blocks(None, np.int64)
        self.state_backed_up = _Blocks(None, np.float64)
        self.state_node_id = _Blocks(None, np.int64)  # artifact-local id

        self.winprob = _Blocks(len(WINPROB_COLUMNS), np.float64)
        self.winprob_parent_state = _Blocks(None, np.int64)

        self.action_rows = _Blocks(len(ACTION_COLUMNS), np.int64)
        self.action_parent_state = _Blocks(None, np.int64)
        self.action_episode = _Blocks(None, np.int64)
        self.action_decision = _Blocks(None, np.int64)

        # one row per (input state, action, output state) path
        self.trans_input = _Blocks(None, np.int64)
        self.trans_action = _Blocks(None, np.int64)
        self.trans_output = _Blocks(None, np.int64)
        self.trans_episode = _Blocks(None, np.int64)
        self.trans_decision = _Blocks(None, np.int64)

        self.counterfactuals: dict[str, _CfTable] = {t: _CfTable() for t in TRANSFORMS}

        # chosen action per (episode, decision), for tree reconstruction
        self.decision_meta: dict[tuple[int, int], dict] = {}

    # ------------------------------------------------------------------
    # Ingestion
    # ------------------------------------------------------------------

    def ingest_episode(self, source: str | Path | bytes) -> tuple[str, dict]:
        """Ingest an artifact; idempotent on identical content.

        Returns (episode_id, row_counts).
        """
        data = source if isinstance(source, bytes) else Path(source).read_bytes()
        artifact = parse_episode(data)
        episode_id = artifact.content_hash
        if episode_id in self._episode_index:
            return episode_id, {"states": 0, "actions": 0, "winprobs": 0,
                                "alreadyIngested": True}
        return self._insert(artifact)

    def _insert(self, artifact: EpisodeArtifact) -> tuple[str, dict]:
        episode_id = artifact.content_hash
        ep_idx = len(self.episodes)

        state_rows, winprob_rows = [], []
        ep_col, dec_col, root_col, depth_col = [], [], [], []
        parent_action_col, predicted_col, backed_col, node_col = [], [], [], []
        wp_parent = []
        act_rows, act_parent, act_ep, act_dec = [], [], [], []
        tr_in, tr_act, tr_out, tr_ep, tr_dec = [], [], [], [], []

        state_base = len(self.state_attrs)
        action_base = len(self.action_rows)

        for dec in artifact.decisions:
            node_to_row: dict[int, int] = {}
            action_to_row: dict[int, int] = {}
            self.decision_meta[(ep_idx, dec.decision_idx)] = {
                "chosen": list(dec.chosen_action),
                "widths": [list(w) for w in dec.widths],
            }
            for node_id in sorted(dec.nodes):
                node = dec.nodes[node_id]
                row = state_base + len(state_rows)
                node_to_row[node_id] = row
                if node.action_id is not None:
                    parent_node, aid, a_row = dec.actions[node.action_id]
                    a_global = action_base + len(act_rows)
                    action_to_row[aid] = a_global
                    act_rows.append(a_row)
                    act_parent.append(node_to_row[parent_node])
                    act_ep.append(ep_idx)
                    act_dec.append(dec.decision_idx)
                    parent_action_col.append(a_global)
                else:
                    parent_action_col.append(-1)
                state_rows.append(node.state_row)
                winprob_rows.append(node.win_probabilities)
                wp_parent.append(row)
                ep_col.append(ep_idx)
                dec_col.append(dec.decision_idx)
                root_col.append(1 if node.depth == 0 else 0)
                depth_col.append(node.depth)
                predicted_col.append(0 if node.depth == 0 else 1)
                backed_col.append(node.backed_up_value)
                node_col.append(node.node_id)
                if node.depth > 0:
                    tr_in.append(node_to_row[node.parent_id])
                    tr_act.append(action_to_row[node.action_id])
                    tr_out.append(row)
                    tr_ep.append(ep_idx)
                    tr_dec.append(dec.decision_idx)

        self.state_attrs.append(np.stack(state_rows) if state_rows
                                else np.empty((0, 67), np.int64))
        self.state_episode.append(ep_col)
        self.state_decision.append(dec_col)
        self.state_is_root.append(root_col)
        self.state_depth.append(depth_col)
        self.state_parent_action.append(parent_action_col)
        self.state_model_predicted.append(predicted_col)
        self.state_backed_up.append(backed_col)
        self.state_node_id.append(node_col)
        self.winprob.append(np.stack(winprob_rows) if winprob_rows
                            else np.empty((0, 4), np.float64))
        self.winprob_parent_state.append(wp_parent)
        self.action_rows.append(np.stack(act_rows) if act_rows
                                else np.empty((0, 8), np.int64))
        self.action_parent_state.append(act_parent)
        self.action_episode.append(act_ep)
        self.action_decision.append(act_dec)
        self.trans_input.append(tr_in)
        self.trans_action.append(tr_act)
        self.trans_output.append(tr_out)
        self.trans_episode.append(tr_ep)
        self.trans_decision.append(tr_dec)

        self.episodes.append(
            EpisodeInfo(
                episode_id=episode_id,
                is_win=artifact.is_win,
                wave_count=artifact.wave_count,
                config_hash=artifact.header.get("configHash", ""),
                decision_count=len(artifact.decisions),
            )
        )
        self._episode_index[episode_id] = ep_idx
        return episode_id, {
            "states": len(state_rows),
            "actions": len(act_rows),
            "winprobs": len(winprob_rows),
            "transitions": len(tr_in),
        }

    # ------------------------------------------------------------------
    # Lookups
    # ------------------------------------------------------------------

    def episode_index(self, episode_id: str) -> int:
        idx = self._episode_index.get(episode_id)
        if idx is None:
            raise NotFoundError(f"unknown episode {episode_id!r}")
        return idx

    def episode_ids(self) -> list[str]:
        return [e.episode_id for e in self.episodes]

    def states_of(self, episode_id: str, decision_idx: int) -> np.ndarray:
        """State row ids for one decision point, ascending (depth order)."""
        ep = self.episode_index(episode_id)
        mask = (self.state_episode.view() == ep) & (
            self.state_decision.view() == decision_idx
        )
        return np.flatnonzero(mask)

    def transitions_of(self, episode_id: str, decision_idx: int) -> np.ndarray:
        ep = self.episode_index(episode_id)
        mask = (self.trans_episode.view() == ep) & (
            self.trans_decision.view() == decision_idx
        )
        return np.flatnonzero(mask)

    def state_row_by_id(self, row_id: int) -> dict:
        attrs = self.state_attrs.view()
        if not 0 <= row_id < len(attrs):
            raise NotFoundError(f"unknown state row {row_id}")
        rec = {name: int(v) for name, v in zip(STATE_COLUMNS, attrs[row_id])}
        rec.update(
            id=int(row_id),
            episodeId=self.episodes[int(self.state_episode.view()[row_id])].episode_id,
            decisionIdx=int(self.state_decision.view()[row_id]),
            isRoot=bool(self.state_is_root.view()[row_id]),
            depth=int(self.state_depth.view()[row_id]),
            parentActionId=(
                None
                if self.state_parent_action.view()[row_id] < 0
                else int(self.state_parent_action.view()[row_id])
            ),
            modelPredicted=bool(self.state_model_predicted.view()[row_id]),
            backedUpValue=float(self.state_backed_up.view()[row_id]),
        )
        wp = self.winprob.view()[row_id]
        rec.update({name: float(v) for name, v in zip(WINPROB_COLUMNS, wp)})
        return rec

    def action_row_by_id(self, row_id: int) -> dict:
        rows = self.action_rows.view()
        if not 0 <= row_id < len(rows):
            raise NotFoundError(f"unknown action row {row_id}")
        rec = {name: int(v) for name, v in zip(ACTION_COLUMNS, rows[row_id])}
        rec.update(
            id=int(row_id),
            parentStateId=int(self.action_parent_state.view()[row_id]),
        )
        return rec

    def episode_summary(self, episode_id: str) -> dict:
        ep = self.episode_index(episode_id)
        info = self.episodes[ep]
        states = int((self.state_episode.view() == ep).sum())
        transitions = int((self.trans_episode.view() == ep).sum())
        decisions = []
        for d in range(info.decision_count):
            rows = self.states_of(episode_id, d)
            decisions.append(
                {
                    "decisionIdx": d,
                    "states": int(len(rows)),
                    "transitions": int(len(self.transitions_of(episode_id, d))),
                }
            )
        return {
            "episodeId": episode_id,
            "isWin": info.is_win,
            "waveCount": info.wave_count,
            "configHash": info.config_hash,
            "decisionPoints": info.decision_count,
            "states": states,
            "transitionInferences": transitions,
            "decisions": decisions,
        }

    def counterfactuals_ready(self, episode_id: str, transform: str) -> bool:
        ep = self.episode_index(episode_id)
        return ep in self.counterfactuals[transform].episodes_done

    # ------------------------------------------------------------------
    # Snapshots
    # ------------------------------------------------------------------

    def save_snapshot(self, path: str | Path) -> None:
        arrays: dict[str, np.ndarray] = {}
        manifest = {
            "schemaVersion": SCHEMA_VERSION,
            "episodes": [
                {
                    "episodeId": e.episode_id,
                    "isWin": e.is_win,
                    "waveCount": e.wave_count,
                    "configHash": e.config_hash,
                    "decisionCount": e.decision_count,
                }
                for e in self.episodes
            ],
            "decisionMeta": [
                {"episode": k[0], "decision": k[1], **v}
                for k, v in sorted(self.decision_meta.items())
            ],
            "cfDone": {t: sorted(self.counterfactuals[t].episodes_done)
                       for t in TRANSFORMS},
        }
        arrays["__manifest__"] = np.frombuffer(
            json.dumps(manifest).encode(), dtype=np.uint8
        )
        for name in _ARRAY_FIELDS:
            arrays[name] = getattr(self, name).view()
        for t in TRANSFORMS:
            cf = self.counterfactuals[t]
            for name in _CF_FIELDS:
                arrays[f"cf_{t}_{name}"] = getattr(cf, name).view()
        with open(path, "wb") as fh:
            np.savez_compressed(fh, **arrays)

    @classmethod
    def load_snapshot(cls, path: str | Path) -> "TreeStore":
        store = cls()
        with np.load(path) as data:
            manifest = json.loads(bytes(data["__manifest__"]).decode())
            if manifest["schemaVersion"] != SCHEMA_VERSION:
                raise StoreError(
                    f"snapshot schema version {manifest['schemaVersion']} "
                    f"not supported (expected {SCHEMA_VERSION})"
                )
            for name in _ARRAY_FIELDS:
                getattr(store, name).append(data[name])
            for t in TRANSFORMS:
                cf = store.counterfactuals[t]
                for name in _CF_FIELDS:
                    getattr(cf, name).append(data[f"cf_{t}_{name}"])
                cf.episodes_done = set(manifest["cfDone"][t])
            for e in manifest["episodes"]:
                info = EpisodeInfo(
                    episode_id=e["episodeId"],
                    is_win=e["isWin"],
                    wave_count=e["waveCount"],
                    config_hash=e["configHash"],
                    decision_count=e["decisionCount"],
                )
                store._episode_index[info.episode_id] = len(store.episodes)
                store.episodes.append(info)
            for m in manifest["decisionMeta"]:
                store.decision_meta[(m["episode"], m["decision"])] = {
                    "chosen": m["chosen"],
                    "widths": m["widths"],
                }
        return store


_ARRAY_FIELDS = (
    "state_attrs",
    "state_episode",
    "state_decision",
    "state_is_root",
    "state_depth",
    "state_parent_action",
    "state_model_predicted",
    "state_backed_up",
    "state_node_id",
    "winprob",
    "winprob_parent_state",
    "action_rows",
    "action_parent_state",
    "action_episode",
    "action_decision",
    "trans_input",
    "trans_action",
    "trans_output",
    "trans_episode",
    "trans_decision",
)

_CF_FIELDS = (
    "state_attrs",
    "state_origin",
    "winprob",
    "winprob_origin",
    "action_rows",
    "action_origin",
    "transition_rows",
    "cf_state_rows",
)
