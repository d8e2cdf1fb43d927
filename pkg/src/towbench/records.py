"""Transition records and their line-delimited persistence."""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .game import AbstractState, PurchaseAction, row_to_state, state_to_row


@dataclass
class TransitionRecord:
    """One observed wave: state, both actions, next state, reward vector.

    The reward vector is zero everywhere except at a terminal next state,
    where it is one-hot on the winner's destroy condition (and stays zero
    on a timeout).
    """

    state: AbstractState
    friendly: PurchaseAction
    enemy: PurchaseAction
    next_state: AbstractState
    reward_vector: np.ndarray

    def validate(self) -> None:
        nonzero = np.flatnonzero(self.reward_vector)
        if len(nonzero) > 1 or not np.isin(self.reward_vector, (0.0, 1.0)).all():
            raise ValueError("reward vector must be one-hot or zero")


def _action_payload(action: PurchaseAction) -> list[int]:
    return [action.lane, *action.purchases]


def _action_from_payload(payload: list[int]) -> PurchaseAction:
    return PurchaseAction(payload[0], tuple(payload[1:4]))


def save_records(records: list[TransitionRecord], path: str | Path) -> None:
    with open(path, "w") as fh:
        fh.write(json.dumps({"t": "header", "kind": "transitions", "version": 1}))
        fh.write("\n")
        for rec in records:
            fh.write(
                json.dumps(
                    {
                        "s": [int(v) for v in state_to_row(rec.state)],
                        "af": _action_payload(rec.friendly),
                        "ae": _action_payload(rec.enemy),
                        "sn": [int(v) for v in state_to_row(rec.next_state)],
                        "r": [float(v) for v in rec.reward_vector],
                    },
                    separators=(",", ":"),
                )
            )
            fh.write("\n")


def load_records(path: str | Path) -> list[TransitionRecord]:
    records = []
    with open(path) as fh:
        header = json.loads(fh.readline())
        if header.get("kind") != "transitions":
            raise ValueError("not a transition record file")
        for line in fh:
            if not line.strip():
                continue
            rec = json.loads(line)
            records.append(
                TransitionRecord(
                    state=row_to_state(np.array(rec["s"], dtype=np.int64)),
                    friendly=_action_from_payload(rec["af"]),
                    enemy=_action_from_payload(rec["ae"]),
                    next_state=row_to_state(np.array(rec["sn"], dtype=np.int64)),
                    reward_vector=np.array(rec["r"], dtype=np.float64),
                )
            )
    return records
