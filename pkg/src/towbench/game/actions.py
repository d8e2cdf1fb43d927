"""Legal purchase enumeration.

Actions are every (lane, building-multiset) a player can afford, plus the
single canonical empty purchase. Order is deterministic: by cost, then lane
(top before bottom), then counts, truncated at the configured cap. The combo
table for a given currency level is cached because the planner re-enumerates
the same currency values thousands of times per decision.
"""

from __future__ import annotations

from functools import lru_cache

import numpy as np

from .config import BOTTOM, GameConfig, TOP
from .state import EMPTY_ACTION, AbstractState, PurchaseAction, is_terminal


@lru_cache(maxsize=8192)
def _combo_table(config: GameConfig, currency: int) -> tuple[np.ndarray, np.ndarray]:
    """All affordable non-empty (lane, counts) rows in canonical order.

    Returns (rows, costs): rows is (N, 4) int64 [lane, marines, banelings,
    immortals] already truncated so the full action list (empty + rows) stays
    within the action cap.
    """
    cm, cb, ci = config.unit_cost
    max_m = currency // cm
    max_b = currency // cb
    max_i = currency // ci
    m, b, i = np.meshgrid(
        np.arange(max_m + 1), np.arange(max_b + 1), np.arange(max_i + 1),
        indexing="ij",
    )
    counts = np.stack([m.ravel(), b.ravel(), i.ravel()], axis=1)
    cost = counts @ np.array(config.unit_cost, dtype=np.int64)
    keep = (cost <= currency) & (cost > 0)
    counts = counts[keep]
    cost = cost[keep]

    # Duplicate per lane, then order by (cost, lane, marines, banelings,
    # immortals). lexsort's last key is the primary one.
    n = len(counts)
    lanes = np.concatenate([np.full(n, TOP), np.full(n, BOTTOM)])
    counts2 = np.concatenate([counts, counts])
    cost2 = np.concatenate([cost, cost])
    order = np.lexsort(
        (counts2[:, 2], counts2[:, 1], counts2[:, 0], lanes, cost2)
    )
    limit = config.action_cap - 1  # slot 0 is the empty action
    order = order[:limit]
    rows = np.column_stack([lanes[order], counts2[order]]).astype(np.int64)
    costs = cost2[order].astype(np.int64)
    rows.setflags(write=False)
    costs.setflags(write=False)
    return rows, costs


def legal_action_rows(
    state: AbstractState, player: int, config: GameConfig
) -> np.ndarray:
    """Vectorized view of the legal actions: (N, 4) rows [lane, m, b, i].

    Row 0 is always the empty purchase. Terminal states yield a (0, 4) array.
    The row order is exactly the order of :func:`legal_actions`.
    """
    if is_terminal(state, config):
        return np.empty((0, 4), dtype=np.int64)
    rows, _ = _combo_table(config, int(state.currency[player]))
    return np.concatenate([np.zeros((1, 4), dtype=np.int64), rows])


def legal_actions(
    state: AbstractState, player: int, config: GameConfig
) -> list[PurchaseAction]:
    """Every affordable purchase for ``player``, empty action first.

    Terminal states have no legal actions.
    """
    rows = legal_action_rows(state, player, config)
    if len(rows) == 0:
        return []
    actions = [EMPTY_ACTION]
    for lane, m, b, i in rows[1:]:
        actions.append(PurchaseAction(int(lane), (int(m), int(b), int(i))))
    return actions


def action_from_row(row: np.ndarray) -> PurchaseAction:
    lane, m, b, i = (int(v) for v in row)
    if m == b == i == 0:
        return EMPTY_ACTION
    return PurchaseAction(lane, (m, b, i))


def check_legal(
    state: AbstractState, action: PurchaseAction, player: int, config: GameConfig
) -> None:
    """Raise LegalityError naming the offending purchase if unaffordable."""
    from .state import LegalityError  # local import avoids a cycle at module load

    cost = action.cost(config)
    have = int(state.currency[player])
    if cost > have:
        raise LegalityError(
            f"illegal purchase for {['friendly', 'enemy'][player]}: "
            f"{action.describe()} costs {cost} but only {have} available"
        )
