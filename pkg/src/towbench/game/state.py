"""Game state, purchase actions, outcomes, and the two symmetry transforms.

The abstract state is the complete, interpretable snapshot the agent reasons
over: base health, production buildings, per-cell unit counts, currency, and
the wave counter. Both symmetry transforms (lane flip and player reversal)
are involutions and commute with the deterministic simulator by construction.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .config import (
    BOTTOM,
    ENEMY,
    FRIENDLY,
    GRID_CELLS,
    GameConfig,
    LANES,
    PLAYERS,
    SCHEMA_MAX_HEALTH,
    SCHEMA_MAX_WAVES,
    TOP,
    UNIT_TYPES,
)

#: Win conditions in canonical order; reward vectors index them the same way.
WIN_CONDITIONS = (
    "friendlyDestroysEnemyTop",
    "friendlyDestroysEnemyBottom",
    "enemyDestroysFriendlyTop",
    "enemyDestroysFriendlyBottom",
)
TIMEOUT_CONDITION = "timeoutLowestHealth"


class LegalityError(ValueError):
    """An action was applied that the acting player cannot afford."""


@dataclass(frozen=True)
class PurchaseAction:
    """One player's per-wave spending decision: a lane and building counts."""

    lane: int
    purchases: tuple[int, int, int]

    def __post_init__(self) -> None:
        if self.lane not in (TOP, BOTTOM):
            raise ValueError(f"invalid lane {self.lane}")
        if len(self.purchases) != 3 or any(p < 0 for p in self.purchases):
            raise ValueError("purchases must be three non-negative counts")

    def cost(self, config: GameConfig) -> int:
        return sum(n * c for n, c in zip(self.purchases, config.unit_cost))

    def is_empty(self) -> bool:
        return all(p == 0 for p in self.purchases)

    def describe(self) -> str:
        if self.is_empty():
            return "buy nothing"
        parts = [
            f"{n} {UNIT_TYPES[u]}" for u, n in enumerate(self.purchases) if n > 0
        ]
        return f"{', '.join(parts)} in {LANES[self.lane]} lane"


#: Canonical empty purchase. Lane is irrelevant when nothing is bought; the
#: legal-action enumeration lists the empty purchase exactly once, as this.
EMPTY_ACTION = PurchaseAction(TOP, (0, 0, 0))


@dataclass(frozen=True)
class Outcome:
    """Terminal result: winner, the condition that ended the game, and the
    decomposed reward vector (one-hot on a destroy condition, all zeros on a
    timeout)."""

    winner: int
    condition: str
    reward_vector: tuple[float, float, float, float]

    def __post_init__(self) -> None:
        if self.winner not in (FRIENDLY, ENEMY):
            raise ValueError(f"invalid winner {self.winner}")
        if self.condition not in WIN_CONDITIONS + (TIMEOUT_CONDITION,):
            raise ValueError(f"invalid condition {self.condition}")
        nonzero = [v for v in self.reward_vector if v != 0.0]
        if any(v not in (0.0, 1.0) for v in self.reward_vector) or len(nonzero) > 1:
            raise ValueError("reward vector must be one-hot or zero")


@dataclass
class AbstractState:
    """Full game snapshot.

    Array layout (all int64):
      health:    (player, lane)
      buildings: (player, lane, unit_type)
      units:     (player, lane, unit_type, grid)  grid index 0 == cell 1
      currency:  (player,)
    """

    health: np.ndarray
    buildings: np.ndarray
    units: np.ndarray
    currency: np.ndarray
    wave_index: int

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, AbstractState):
            return NotImplemented
        return (
            self.wave_index == other.wave_index
            and np.array_equal(self.health, other.health)
            and np.array_equal(self.buildings, other.buildings)
            and np.array_equal(self.units, other.units)
            and np.array_equal(self.currency, other.currency)
        )

    def copy(self) -> "AbstractState":
        return AbstractState(
            health=self.health.copy(),
            buildings=self.buildings.copy(),
            units=self.units.copy(),
            currency=self.currency.copy(),
            wave_index=self.wave_index,
        )

    def key_bytes(self) -> bytes:
        """Stable byte key, used to derive per-state deterministic seeds."""
        return b"".join(
            (
                self.health.tobytes(),
                self.buildings.tobytes(),
                self.units.tobytes(),
                self.currency.tobytes(),
                int(self.wave_index).to_bytes(4, "little"),
            )
        )

    def validate(self) -> None:
        if self.health.shape != (2, 2) or self.buildings.shape != (2, 2, 3):
            raise ValueError("bad state array shapes")
        if self.units.shape != (2, 2, 3, GRID_CELLS) or self.currency.shape != (2,):
            raise ValueError("bad state array shapes")
        if (self.health < 0).any() or (self.health > SCHEMA_MAX_HEALTH).any():
            raise ValueError("health out of range")
        if (self.buildings < 0).any() or (self.units < 0).any():
            raise ValueError("negative counts")
        if (self.currency < 0).any():
            raise ValueError("negative currency")
        if not 0 <= self.wave_index <= SCHEMA_MAX_WAVES:
            raise ValueError("wave index out of range")


def initial_state(config: GameConfig) -> AbstractState:
    """Empty board: full base health, no production, equal starting currency."""
    return AbstractState(
        health=np.full((2, 2), config.base_health, dtype=np.int64),
        buildings=np.zeros((2, 2, 3), dtype=np.int64),
        units=np.zeros((2, 2, 3, GRID_CELLS), dtype=np.int64),
        currency=np.full((2,), config.starting_currency, dtype=np.int64),
        wave_index=0,
    )


def is_terminal(state: AbstractState, config: GameConfig) -> bool:
    return bool((state.health == 0).any()) or state.wave_index >= config.max_waves


def flip_lanes(state: AbstractState) -> AbstractState:
    """Swap the top and bottom lanes, preserving players and grid indices."""
    return AbstractState(
        health=state.health[:, ::-1].copy(),
        buildings=state.buildings[:, ::-1].copy(),
        units=state.units[:, ::-1].copy(),
        currency=state.currency.copy(),
        wave_index=state.wave_index,
    )


def flip_lanes_action(action: PurchaseAction) -> PurchaseAction:
    return PurchaseAction(BOTTOM if action.lane == TOP else TOP, action.purchases)


def reverse_players(state: AbstractState) -> AbstractState:
    """Swap the two players and mirror the grid axis (cell g becomes 5 - g)."""
    return AbstractState(
        health=state.health[::-1].copy(),
        buildings=state.buildings[::-1].copy(),
        units=state.units[::-1, :, :, ::-1].copy(),
        currency=state.currency[::-1].copy(),
        wave_index=state.wave_index,
    )


def reverse_players_actions(
    friendly: PurchaseAction, enemy: PurchaseAction
) -> tuple[PurchaseAction, PurchaseAction]:
    """Mirror an action pair: each player takes over the other's purchase.

    Lanes are unaffected by player reversal (the mirror is along the grid
    axis, not across lanes), so the actions themselves are unchanged.
    """
    return enemy, friendly


def reverse_condition(condition: str) -> str:
    """Map a win condition through the player-reversal transform."""
    if condition == TIMEOUT_CONDITION:
        return condition
    index = WIN_CONDITIONS.index(condition)
    return WIN_CONDITIONS[(index + 2) % 4]


def flip_condition(condition: str) -> str:
    """Map a win condition through the lane-flip transform."""
    if condition == TIMEOUT_CONDITION:
        return condition
    index = WIN_CONDITIONS.index(condition)
    return WIN_CONDITIONS[index ^ 1]


# ---------------------------------------------------------------------------
# Canonical attribute order
# ---------------------------------------------------------------------------
# One flat ordering of every state attribute, shared by the feature encoder,
# the relational store, and the rule DSL. Names follow the store's naming
# convention: friendlyMarineBldgsTop, enemyImmortalBottomGrid4, and so on.


def _title(name: str) -> str:
    return name[0].upper() + name[1:]


def state_attribute_names() -> list[str]:
    names = []
    for p in PLAYERS:
        for lane in LANES:
            names.append(f"{p}Health{_title(lane)}")
    for p in PLAYERS:
        for unit in UNIT_TYPES:
            for lane in LANES:
                names.append(f"{p}{_title(unit)}Bldgs{_title(lane)}")
    for p in PLAYERS:
        for unit in UNIT_TYPES:
            for lane in LANES:
                for g in range(1, GRID_CELLS + 1):
                    names.append(f"{p}{_title(unit)}{_title(lane)}Grid{g}")
    for p in PLAYERS:
        names.append(f"{p}Currency")
    names.append("waveIndex")
    return names


STATE_ATTRIBUTES = tuple(state_attribute_names())
NUM_STATE_ATTRIBUTES = len(STATE_ATTRIBUTES)  # 4 + 12 + 48 + 2 + 1 = 67


def state_to_row(state: AbstractState) -> np.ndarray:
    """Flatten a state into the canonical 67-value attribute row."""
    row = np.empty(NUM_STATE_ATTRIBUTES, dtype=np.int64)
    row[0:4] = state.health.reshape(-1)
    # buildings: player, unit, lane
    row[4:16] = state.buildings.transpose(0, 2, 1).reshape(-1)
    # units: player, unit, lane, grid
    row[16:64] = state.units.transpose(0, 2, 1, 3).reshape(-1)
    row[64:66] = state.currency
    row[66] = state.wave_index
    return row


def row_to_state(row: np.ndarray) -> AbstractState:
    row = np.asarray(row, dtype=np.int64)
    return AbstractState(
        health=row[0:4].reshape(2, 2).copy(),
        buildings=row[4:16].reshape(2, 3, 2).transpose(0, 2, 1).copy(),
        units=row[16:64].reshape(2, 3, 2, GRID_CELLS).transpose(0, 2, 1, 3).copy(),
        currency=row[64:66].copy(),
        wave_index=int(row[66]),
    )
