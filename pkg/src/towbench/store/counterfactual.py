"""Counterfactual materialization.

For every stored transition (input state, action pair, output state), the
inputs are transformed (lane flip or player reversal), the bundle re-runs
its transition and value inference on the transformed inputs, and the
results are stored with origin links back to the source rows. With the
exact backend the counterfactual outputs are exactly the transforms of the
originals (simulator equivariance), which is the zero-violation oracle for
symmetry rules; any learned or flaw-injected deviation becomes visible to
the symmetry rule classes.
"""

from __future__ import annotations

import numpy as np

from ..game import (
    PurchaseAction,
    action_rows,
    flip_lanes,
    flip_lanes_action,
    reverse_players,
    reverse_players_actions,
    row_to_state,
    state_to_row,
)
from ..models import ModelBundle
from .artifact import action_pair_row
from .tables import TRANSFORMS, StoreError, TreeStore


def _unpack_action_row(row: np.ndarray) -> tuple[PurchaseAction, PurchaseAction]:
    friendly = PurchaseAction(int(row[3]), (int(row[0]), int(row[1]), int(row[2])))
    enemy = PurchaseAction(int(row[7]), (int(row[4]), int(row[5]), int(row[6])))
    return friendly, enemy


def _transform_inputs(transform, state, friendly, enemy):
    if transform == "flip":
        return flip_lanes(state), flip_lanes_action(friendly), flip_lanes_action(enemy)
    rf, re = reverse_players_actions(friendly, enemy)
    return reverse_players(state), rf, re


def materialize_counterfactuals(
    store: TreeStore,
    episode_id: str,
    bundle: ModelBundle,
    transforms: tuple[str, ...] = TRANSFORMS,
) -> dict[str, int]:
    """Run inference on transformed inputs for every transition of an
    episode. Idempotent per (episode, transform). Returns row counts."""
    if bundle is None:
        raise StoreError("counterfactual materialization requires a model bundle")
    ep = store.episode_index(episode_id)
    counts: dict[str, int] = {}
    trans_mask = store.trans_episode.view() == ep
    trans_idx = np.flatnonzero(trans_mask)
    in_rows = store.trans_input.view()[trans_idx]
    act_rows_idx = store.trans_action.view()[trans_idx]
    out_rows = store.trans_output.view()[trans_idx]

    state_attrs = store.state_attrs.view()
    stored_actions = store.action_rows.view()

    for transform in transforms:
        if transform not in TRANSFORMS:
            raise StoreError(f"unknown transform {transform!r}")
        cf = store.counterfactuals[transform]
        if ep in cf.episodes_done:
            counts[transform] = 0
            continue

        if len(trans_idx) == 0:
            cf.episodes_done.add(ep)
            counts[transform] = 0
            continue

        states, frs, ers = [], [], []
        for i in range(len(trans_idx)):
            state = row_to_state(state_attrs[in_rows[i]])
            friendly, enemy = _unpack_action_row(stored_actions[act_rows_idx[i]])
            ts, tf, te = _transform_inputs(transform, state, friendly, enemy)
            states.append(ts)
            frs.append(tf)
            ers.append(te)

        outs, _ = bundle.predict_transition_batch(
            states, action_rows(frs), action_rows(ers)
        )
        out_attr_rows = np.stack([state_to_row(s) for s in outs])
        winprobs = bundle.value4_rows(out_attr_rows)
        act_pairs = np.array(
            [action_pair_row(f, e) for f, e in zip(frs, ers)], dtype=np.int64
        )

        base_row = len(cf.state_attrs)
        cf.state_attrs.append(out_attr_rows)
        cf.state_origin.append(out_rows)
        cf.winprob.append(winprobs)
        cf.winprob_origin.append(out_rows)
        cf.action_rows.append(act_pairs)
        cf.action_origin.append(act_rows_idx)
        cf.transition_rows.append(trans_idx)
        cf.cf_state_rows.append(np.arange(base_row, base_row + len(trans_idx)))
        cf.episodes_done.add(ep)
        counts[transform] = int(len(trans_idx))

    return counts
