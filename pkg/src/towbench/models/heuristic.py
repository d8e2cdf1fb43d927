"""Decomposed win-probability heuristic used by the simulator-backed models.

Each of the four destroy conditions gets a score built from integer terms:
damage already dealt to the target base, unit threat weighted by how far the
units have advanced, and standing production. Scores normalize into [0, 1)
probabilities that sum below one. All terms are computed per player and per
lane with mirrored advancement weights, so the heuristic commutes with both
symmetry transforms exactly. Terminal states bypass the formula and report
the decided outcome (one-hot on the destroy condition, zeros on a timeout).
"""

from __future__ import annotations

import numpy as np

from ..game import ENEMY, FRIENDLY, GRID_CELLS, GameConfig

W_PROGRESS = 3
W_THREAT = 2
W_PROD = 1
PROD_WEIGHT = 4  # a building keeps producing; worth about one crossed unit

#: Advancement weight per grid index, per player: cells closer to the
#: opposing base weigh more, mirrored between the players.
_ADVANCE = np.array(
    [[g + 1 for g in range(GRID_CELLS)], [GRID_CELLS - g for g in range(GRID_CELLS)]],
    dtype=np.int64,
)


def lane_scores(state, config: GameConfig) -> np.ndarray:
    """Integer attack scores S[player][lane] for a single state."""
    bd = np.array(config.base_damage, dtype=np.int64)
    progress = np.maximum(config.base_health - state.health[::-1], 0)
    threat = np.einsum("plug,u,pg->pl", state.units, bd, _ADVANCE)
    prod = state.buildings @ bd * PROD_WEIGHT
    return W_PROGRESS * progress + W_THREAT * threat + W_PROD * prod


def vector_from_scores(scores: np.ndarray, config: GameConfig) -> np.ndarray:
    """Normalize S[player][lane] into the 4-vector of win probabilities."""
    total = scores.sum()
    denom = float(total + 3 * config.base_health)
    return np.array(
        [
            scores[FRIENDLY, 0] / denom,
            scores[FRIENDLY, 1] / denom,
            scores[ENEMY, 0] / denom,
            scores[ENEMY, 1] / denom,
        ]
    )


def terminal_vector(health: np.ndarray, wave_index: int, config: GameConfig):
    """Decided-outcome vector, or None if the state is not terminal.

    A destroyed own base zeroes that player's components unconditionally,
    so mutual destruction (both sides losing a base in the same tick) is
    the all-zero vector, as is a timeout. A single destroyed side resolves
    one-hot, top lane first.
    """
    friendly_lost = health[FRIENDLY, 0] <= 0 or health[FRIENDLY, 1] <= 0
    enemy_lost = health[ENEMY, 0] <= 0 or health[ENEMY, 1] <= 0
    if friendly_lost and enemy_lost:
        return np.zeros(4)
    if enemy_lost:
        if health[ENEMY, 0] <= 0:
            return np.array([1.0, 0.0, 0.0, 0.0])
        return np.array([0.0, 1.0, 0.0, 0.0])
    if friendly_lost:
        if health[FRIENDLY, 0] <= 0:
            return np.array([0.0, 0.0, 1.0, 0.0])
        return np.array([0.0, 0.0, 0.0, 1.0])
    if wave_index >= config.max_waves:
        return np.zeros(4)
    return None


def win_probability_vector(state, config: GameConfig) -> np.ndarray:
    decided = terminal_vector(state.health, state.wave_index, config)
    if decided is not None:
        return decided
    return vector_from_scores(lane_scores(state, config), config)


def win_probability_rows(rows: np.ndarray, config: GameConfig) -> np.ndarray:
    """Vectorized heuristic over (N, 67) attribute rows."""
    n = len(rows)
    bd = np.array(config.base_damage, dtype=np.int64)
    health = rows[:, 0:4].reshape(n, 2, 2)
    buildings = rows[:, 4:16].reshape(n, 2, 3, 2)  # player, unit, lane
    units = rows[:, 16:64].reshape(n, 2, 3, 2, GRID_CELLS)  # p, u, l, g
    wave = rows[:, 66]

    progress = np.maximum(config.base_health - health[:, ::-1], 0)
    threat_f = np.einsum("nulg,u,g->nl", units[:, FRIENDLY], bd, _ADVANCE[FRIENDLY])
    threat_e = np.einsum("nulg,u,g->nl", units[:, ENEMY], bd, _ADVANCE[ENEMY])
    threat = np.stack([threat_f, threat_e], axis=1)
    prod = np.einsum("npul,u->npl", buildings, bd) * PROD_WEIGHT
    scores = W_PROGRESS * progress + W_THREAT * threat + W_PROD * prod

    denom = scores.sum(axis=(1, 2)).astype(np.float64) + 3.0 * config.base_health
    out = np.empty((n, 4))
    out[:, 0] = scores[:, FRIENDLY, 0] / denom
    out[:, 1] = scores[:, FRIENDLY, 1] / denom
    out[:, 2] = scores[:, ENEMY, 0] / denom
    out[:, 3] = scores[:, ENEMY, 1] / denom

    # Terminal overrides. A destroyed own base zeroes that player's
    # components unconditionally: mutual destruction and timeouts are the
    # zero vector, a single destroyed side resolves one-hot (top lane
    # first).
    timed_out = wave >= config.max_waves
    out[timed_out] = 0.0
    friendly_lost = (health[:, FRIENDLY] <= 0).any(axis=1)
    enemy_lost = (health[:, ENEMY] <= 0).any(axis=1)
    both = friendly_lost & enemy_lost
    only_enemy = enemy_lost & ~friendly_lost
    only_friendly = friendly_lost & ~enemy_lost
    out[friendly_lost | enemy_lost] = 0.0
    out[only_enemy & (health[:, ENEMY, 0] <= 0), 0] = 1.0
    out[only_enemy & (health[:, ENEMY, 0] > 0), 1] = 1.0
    out[only_friendly & (health[:, FRIENDLY, 0] <= 0), 2] = 1.0
    out[only_friendly & (health[:, FRIENDLY, 0] > 0), 3] = 1.0
    out[both] = 0.0
    return out


def purchase_score_delta(counts: np.ndarray, config: GameConfig) -> np.ndarray:
    """Score increase from buying ``counts`` (N, 3) buildings in one lane."""
    bd = np.array(config.base_damage, dtype=np.int64)
    return W_PROD * PROD_WEIGHT * (counts @ bd)
