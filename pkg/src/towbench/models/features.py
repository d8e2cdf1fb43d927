"""Feature encoding between abstract states/actions and network vectors.

Every state attribute is scaled into [0, 1] by a documented schema-wide
maximum, in the canonical attribute order shared with the relational store.
Decoding rounds back to integers and clamps to the schema, so decoded
predictions are always structurally valid rows even when the network is
wrong about the game.
"""

from __future__ import annotations

import numpy as np

from ..game import (
    NUM_STATE_ATTRIBUTES,
    SCHEMA_MAX_HEALTH,
    SCHEMA_MAX_WAVES,
    AbstractState,
    PurchaseAction,
    row_to_state,
    state_to_row,
)

#: Documented scaling maxima per attribute block.
MAX_BUILDINGS = 100
MAX_UNITS_PER_CELL = 200
MAX_CURRENCY = 5000
MAX_PURCHASE = 40

STATE_DIM = NUM_STATE_ATTRIBUTES  # 67
ACTION_DIM = 5  # lane one-hot + three scaled purchase counts


def _state_scales() -> np.ndarray:
    scales = np.empty(STATE_DIM, dtype=np.float64)
    scales[0:4] = SCHEMA_MAX_HEALTH
    scales[4:16] = MAX_BUILDINGS
    scales[16:64] = MAX_UNITS_PER_CELL
    scales[64:66] = MAX_CURRENCY
    scales[66] = SCHEMA_MAX_WAVES
    return scales


STATE_SCALES = _state_scales()

# Clamp bounds applied when decoding; counts have no schema upper bound.
_LOWER = np.zeros(STATE_DIM)
_UPPER = np.full(STATE_DIM, np.inf)
_UPPER[0:4] = SCHEMA_MAX_HEALTH
_UPPER[66] = SCHEMA_MAX_WAVES


def encode_state(state: AbstractState) -> np.ndarray:
    return state_to_row(state).astype(np.float64) / STATE_SCALES


def encode_state_rows(rows: np.ndarray) -> np.ndarray:
    """Encode a (N, 67) matrix of attribute rows."""
    return rows.astype(np.float64) / STATE_SCALES


def decode_state(vector: np.ndarray) -> AbstractState:
    """Round-and-clamp decode back to a structurally valid state."""
    raw = np.rint(np.asarray(vector, dtype=np.float64) * STATE_SCALES)
    raw = np.clip(raw, _LOWER, _UPPER)
    return row_to_state(raw.astype(np.int64))


def decode_state_rows(vectors: np.ndarray) -> np.ndarray:
    raw = np.rint(np.asarray(vectors, dtype=np.float64) * STATE_SCALES)
    raw = np.clip(raw, _LOWER, _UPPER)
    return raw.astype(np.int64)


def encode_action(action: PurchaseAction) -> np.ndarray:
    vec = np.zeros(ACTION_DIM, dtype=np.float64)
    vec[action.lane] = 1.0
    vec[2:5] = np.array(action.purchases, dtype=np.float64) / MAX_PURCHASE
    return vec


def encode_action_rows(rows: np.ndarray) -> np.ndarray:
    """Encode (N, 4) action rows [lane, m, b, i] into (N, 5) features."""
    out = np.zeros((len(rows), ACTION_DIM), dtype=np.float64)
    out[np.arange(len(rows)), rows[:, 0]] = 1.0
    out[:, 2:5] = rows[:, 1:].astype(np.float64) / MAX_PURCHASE
    return out
