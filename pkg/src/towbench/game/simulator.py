"""Wave simulator.

One call advances the game by one wave: purchases are applied, every
production building spawns one unit, then combat runs for a fixed number of
ticks. Units advance one cell toward the opposing base at their type's
cadence and stop as soon as opponents are in their own cell or the next cell
ahead; stopped groups exchange damage simultaneously each tick, spread
proportionally across defender types by the rock-paper-scissors matrix.
Units in the cell adjacent to the opposing base attack it when they have no
units to fight. Damage accumulates in per-group pools within a wave; whole
units are removed as their pool crosses their hit points, and residual pool
damage does not carry across wave boundaries (the abstract state is the
complete state).

Everything is implemented over a batch axis: the planner expands thousands
of tree nodes per decision and simulating them in one vectorized call is
what keeps full matches cheap. The scalar entry point wraps a batch of one.

In deterministic mode the dynamics are an exact function of the inputs and
commute with both symmetry transforms; in stochastic mode every damage
amount is scaled by a seeded uniform factor and rounded.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .actions import check_legal
from .config import ENEMY, FRIENDLY, GRID_CELLS, GameConfig
from .state import (
    AbstractState,
    Outcome,
    PurchaseAction,
    TIMEOUT_CONDITION,
    WIN_CONDITIONS,
    is_terminal,
)

#: Outcome condition codes used by the batched API.
NO_OUTCOME = -1
TIMEOUT_CODE = 4


@dataclass
class BatchState:
    """Struct-of-arrays state over a batch axis. Shapes:

    health (B,2,2), buildings (B,2,2,3), units (B,2,2,3,4), currency (B,2),
    wave (B,).
    """

    health: np.ndarray
    buildings: np.ndarray
    units: np.ndarray
    currency: np.ndarray
    wave: np.ndarray

    def __len__(self) -> int:
        return len(self.wave)


def stack_states(states: list[AbstractState]) -> BatchState:
    return BatchState(
        health=np.stack([s.health for s in states]),
        buildings=np.stack([s.buildings for s in states]),
        units=np.stack([s.units for s in states]),
        currency=np.stack([s.currency for s in states]),
        wave=np.array([s.wave_index for s in states], dtype=np.int64),
    )


def unstack_states(batch: BatchState) -> list[AbstractState]:
    return [
        AbstractState(
            health=batch.health[i].copy(),
            buildings=batch.buildings[i].copy(),
            units=batch.units[i].copy(),
            currency=batch.currency[i].copy(),
            wave_index=int(batch.wave[i]),
        )
        for i in range(len(batch))
    ]


def action_rows(actions: list[PurchaseAction]) -> np.ndarray:
    """Pack actions as (B, 4) rows [lane, marines, banelings, immortals]."""
    return np.array(
        [[a.lane, a.purchases[0], a.purchases[1], a.purchases[2]] for a in actions],
        dtype=np.int64,
    ).reshape(len(actions), 4)


def _spread_damage(
    attacker_mass: np.ndarray,
    defender_units: np.ndarray,
    dmg: np.ndarray,
    jitter: float,
    rng: np.random.Generator | None,
) -> np.ndarray:
    """Damage dealt into each defender (type, cell) pool.

    attacker_mass (B,2,3,4): attackers whose damage lands at each cell.
    defender_units (B,2,3,4): defenders present in each cell.
    Returns (B,2,3,4) float damage per defender pool.
    """
    total = defender_units.sum(axis=2, keepdims=True)
    share = defender_units / np.maximum(total, 1)
    # flow[b,l,u,v,c]: damage from attacker type u into defender type v pool
    flow = attacker_mass[:, :, :, None, :] * dmg[None, None, :, :, None]
    flow = flow * share[:, :, None, :, :]
    if jitter > 0.0:
        rho = rng.uniform(1.0 - jitter, 1.0 + jitter, size=flow.shape)
        flow = np.rint(flow * rho)
    return flow.sum(axis=2)


def simulate_wave_batch(
    config: GameConfig,
    batch: BatchState,
    friendly_rows: np.ndarray,
    enemy_rows: np.ndarray,
    rng: np.random.Generator | None = None,
) -> tuple[BatchState, np.ndarray, np.ndarray]:
    """Advance every batch item by one wave.

    Returns (next_batch, condition_codes, winners). Condition codes are
    indexes into WIN_CONDITIONS, TIMEOUT_CODE for a timeout, or NO_OUTCOME.
    Legality must have been checked by the caller.
    """
    jitter = config.jitter
    if jitter > 0.0 and rng is None:
        raise ValueError("stochastic config requires an rng")

    b = len(batch)
    idx = np.arange(b)
    health = batch.health.copy()
    buildings = batch.buildings.copy()
    units = batch.units.copy()
    currency = batch.currency.copy()
    wave = batch.wave.copy()

    costs = np.array(config.unit_cost, dtype=np.int64)
    for player, rows in ((FRIENDLY, friendly_rows), (ENEMY, enemy_rows)):
        spend = rows[:, 1:] @ costs
        if (spend > currency[:, player]).any():
            raise ValueError("unaffordable action reached the simulator")
        currency[:, player] -= spend
        buildings[idx, player, rows[:, 0]] += rows[:, 1:]

    # Each building produces one unit at its player's entry cell.
    units[:, FRIENDLY, :, :, 0] += buildings[:, FRIENDLY]
    units[:, ENEMY, :, :, GRID_CELLS - 1] += buildings[:, ENEMY]

    pools = np.zeros((b, 2, 2, 3, GRID_CELLS), dtype=np.float64)
    active = np.ones(b, dtype=bool)
    condition = np.full(b, NO_OUTCOME, dtype=np.int64)

    dmg = np.array(config.damage, dtype=np.float64)
    hp = np.array(config.unit_hp, dtype=np.int64)
    base_dmg = np.array(config.base_damage, dtype=np.float64)

    for tick in range(1, config.ticks_per_wave + 1):
        if not active.any():
            break

        # Movement: a group advances one cell unless opponents occupy its
        # cell or the cell it would enter. Both sides move from the same
        # pre-tick snapshot so the rule is player-symmetric.
        occ_f = units[:, FRIENDLY].sum(axis=2) > 0  # (B,2,4)
        occ_e = units[:, ENEMY].sum(axis=2) > 0
        act = active[:, None]
        for u in range(3):
            if tick % config.ticks_per_cell[u] != 0:
                continue
            for g in range(GRID_CELLS - 2, -1, -1):
                can = act & ~occ_e[:, :, g] & ~occ_e[:, :, g + 1]
                moving = units[:, FRIENDLY, :, u, g] * can
                units[:, FRIENDLY, :, u, g + 1] += moving
                units[:, FRIENDLY, :, u, g] -= moving
                moved_pool = pools[:, FRIENDLY, :, u, g] * can
                pools[:, FRIENDLY, :, u, g + 1] += moved_pool
                pools[:, FRIENDLY, :, u, g] -= moved_pool
            for g in range(1, GRID_CELLS):
                can = act & ~occ_f[:, :, g] & ~occ_f[:, :, g - 1]
                moving = units[:, ENEMY, :, u, g] * can
                units[:, ENEMY, :, u, g - 1] += moving
                units[:, ENEMY, :, u, g] -= moving
                moved_pool = pools[:, ENEMY, :, u, g] * can
                pools[:, ENEMY, :, u, g - 1] += moved_pool
                pools[:, ENEMY, :, u, g] -= moved_pool

        # Combat: a group attacks opponents in its own cell, else in the
        # facing cell one step toward the opposing base.
        occ_f = units[:, FRIENDLY].sum(axis=2) > 0
        occ_e = units[:, ENEMY].sum(axis=2) > 0

        f_here = occ_e & act[:, :, None]
        f_ahead = np.zeros_like(f_here)
        f_ahead[:, :, :-1] = (
            ~occ_e[:, :, :-1] & occ_e[:, :, 1:] & act[:, :, None]
        )
        am_f = units[:, FRIENDLY] * f_here[:, :, None, :]
        am_f[:, :, :, 1:] += units[:, FRIENDLY, :, :, :-1] * f_ahead[:, :, None, :-1]

        e_here = occ_f & act[:, :, None]
        e_ahead = np.zeros_like(e_here)
        e_ahead[:, :, 1:] = ~occ_f[:, :, 1:] & occ_f[:, :, :-1] & act[:, :, None]
        am_e = units[:, ENEMY] * e_here[:, :, None, :]
        am_e[:, :, :, :-1] += units[:, ENEMY, :, :, 1:] * e_ahead[:, :, None, 1:]

        pools[:, ENEMY] += _spread_damage(am_f, units[:, ENEMY], dmg, jitter, rng)
        pools[:, FRIENDLY] += _spread_damage(am_e, units[:, FRIENDLY], dmg, jitter, rng)

        # Remove whole kills after the simultaneous exchange.
        kills = np.minimum(
            units, np.floor_divide(pools, hp[None, None, None, :, None]).astype(np.int64)
        )
        units -= kills
        pools -= kills * hp[None, None, None, :, None]
        pools[units == 0] = 0.0

        # Base damage from groups adjacent to the opposing base with no
        # units left to fight in their cell.
        f_hits = (~occ_e[:, :, GRID_CELLS - 1]) & act  # (B,2)
        e_hits = (~occ_f[:, :, 0]) & act
        f_amount = units[:, FRIENDLY, :, :, GRID_CELLS - 1] * base_dmg[None, None, :]
        e_amount = units[:, ENEMY, :, :, 0] * base_dmg[None, None, :]
        if jitter > 0.0:
            f_amount = np.rint(
                f_amount * rng.uniform(1.0 - jitter, 1.0 + jitter, f_amount.shape)
            )
            e_amount = np.rint(
                e_amount * rng.uniform(1.0 - jitter, 1.0 + jitter, e_amount.shape)
            )
        health[:, ENEMY] -= (f_amount.sum(axis=2) * f_hits).astype(np.int64)
        health[:, FRIENDLY] -= (e_amount.sum(axis=2) * e_hits).astype(np.int64)
        np.clip(health, 0, None, out=health)

        # First base to fall ends the game; simultaneous falls resolve in
        # canonical condition order.
        dead = health == 0
        finished = active & dead.any(axis=(1, 2))
        if finished.any():
            cond_new = np.select(
                [
                    dead[:, ENEMY, 0],
                    dead[:, ENEMY, 1],
                    dead[:, FRIENDLY, 0],
                    dead[:, FRIENDLY, 1],
                ],
                [0, 1, 2, 3],
                default=NO_OUTCOME,
            )
            condition[finished] = cond_new[finished]
            active &= ~finished

    # Uniform end-of-wave bookkeeping, applied to every item so currency
    # accounting holds for all transitions.
    currency += config.income_per_wave
    wave += 1

    timed_out = (condition == NO_OUTCOME) & (wave >= config.max_waves)
    condition[timed_out] = TIMEOUT_CODE

    winner = np.full(b, -1, dtype=np.int64)
    winner[(condition == 0) | (condition == 1)] = FRIENDLY
    winner[(condition == 2) | (condition == 3)] = ENEMY
    if timed_out.any():
        flat = health.reshape(b, 4)
        lowest = flat.min(axis=1)
        f_min = (health[:, FRIENDLY] == lowest[:, None]).any(axis=1)
        e_min = (health[:, ENEMY] == lowest[:, None]).any(axis=1)
        f_total = health[:, FRIENDLY].sum(axis=1)
        e_total = health[:, ENEMY].sum(axis=1)
        # Loser owns the single lowest base; ties fall to lower total
        # health; a full tie is recorded as an enemy win.
        f_loses = np.where(
            f_min & ~e_min,
            True,
            np.where(~f_min & e_min, False, f_total <= e_total),
        )
        winner[timed_out] = np.where(f_loses, ENEMY, FRIENDLY)[timed_out]

    out = BatchState(health, buildings, units, currency, wave)
    return out, condition, winner


def build_outcome(code: int, winner: int) -> Outcome | None:
    if code == NO_OUTCOME:
        return None
    if code == TIMEOUT_CODE:
        return Outcome(int(winner), TIMEOUT_CONDITION, (0.0, 0.0, 0.0, 0.0))
    reward = [0.0, 0.0, 0.0, 0.0]
    reward[code] = 1.0
    return Outcome(int(winner), WIN_CONDITIONS[code], tuple(reward))


def simulate_wave(
    state: AbstractState,
    friendly: PurchaseAction,
    enemy: PurchaseAction,
    config: GameConfig,
    rng: np.random.Generator | None = None,
) -> tuple[AbstractState, Outcome | None]:
    """Advance one state by one wave. Raises LegalityError on an
    unaffordable purchase and ValueError on an already-finished game."""
    if is_terminal(state, config):
        raise ValueError("cannot simulate a wave on a terminal state")
    check_legal(state, friendly, FRIENDLY, config)
    check_legal(state, enemy, ENEMY, config)
    batch = stack_states([state])
    nxt, condition, winner = simulate_wave_batch(
        config, batch, action_rows([friendly]), action_rows([enemy]), rng
    )
    return unstack_states(nxt)[0], build_outcome(int(condition[0]), int(winner[0]))
