"""Model backends and the bundle the planner consumes.

A bundle carries three components: a transition model, an action ranker,
and a state-value function. Each component is tagged with its backend kind
(exact, flawed, learned) and the kinds may mix freely. The exact backend
wraps the deterministic simulator and an equivariant heuristic, providing
the zero-violation oracle that separates model flaws from rule flaws.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from ..game import (
    ENEMY,
    FRIENDLY,
    AbstractState,
    GameConfig,
    PurchaseAction,
    action_from_row,
    action_rows,
    check_legal,
    is_terminal,
    legal_action_rows,
    reverse_players,
    simulate_wave,
    simulate_wave_batch,
    stack_states,
    state_to_row,
    unstack_states,
)
from . import features
from .heuristic import (
    lane_scores,
    purchase_score_delta,
    terminal_vector,
    vector_from_scores,
    win_probability_rows,
    win_probability_vector,
)
from .network import DenseNet, sigmoid


def scalar_value(q4: np.ndarray, player: int, diagnostics: dict | None = None) -> float:
    """A player's win probability: the sum of their two destroy components,
    clamped at one (with a diagnostic when the raw sum overflows)."""
    raw = float(q4[0] + q4[1]) if player == FRIENDLY else float(q4[2] + q4[3])
    if raw > 1.0:
        if diagnostics is not None:
            diagnostics["scalar_overflow"] = diagnostics.get("scalar_overflow", 0) + 1
        return 1.0
    return raw


# ---------------------------------------------------------------------------
# Exact backend
# ---------------------------------------------------------------------------


class ExactTransitionModel:
    """True dynamics: the wave simulator in deterministic mode."""

    kind = "exact"

    def __init__(self, config: GameConfig):
        self.config = config.as_deterministic()

    def predict(self, state, friendly, enemy):
        nxt, outcome = simulate_wave(state, friendly, enemy, self.config)
        reward = np.zeros(4) if outcome is None else np.array(outcome.reward_vector)
        return nxt, reward

    def predict_batch(self, states, friendly_rows, enemy_rows):
        batch = stack_states(states)
        nxt, condition, _ = simulate_wave_batch(
            self.config, batch, friendly_rows, enemy_rows
        )
        rewards = np.zeros((len(states), 4))
        hit = (condition >= 0) & (condition <= 3)
        rewards[hit, condition[hit]] = 1.0
        return unstack_states(nxt), rewards


class ExactRanker:
    """Ranks purchases by the heuristic value of the state with the purchase
    applied, or by exhaustive lookahead when a horizon is set.

    The zero-horizon score is O(1) per action thanks to the incremental
    production term, which is what makes full-width tree builds cheap.
    """

    kind = "exact"

    def __init__(self, config: GameConfig, horizon: int = 0):
        self.config = config.as_deterministic()
        self.horizon = horizon

    def _score_rows(self, state, rows: np.ndarray, player: int) -> np.ndarray:
        # Mirrors q_values exactly, per-component division included, so the
        # vectorized ranking and the scalar Q agree to the last bit.
        scores = lane_scores(state, self.config)
        delta = purchase_score_delta(rows[:, 1:], self.config)
        lanes = rows[:, 0]
        acted = scores[player, lanes] + delta
        other = scores[player, 1 - lanes]
        denom = (scores.sum() + delta + 3 * self.config.base_health).astype(np.float64)
        return acted / denom + other / denom

    def q_values(self, state, action: PurchaseAction, player: int) -> np.ndarray:
        if self.horizon > 0:
            return _minimax_q(state, action, player, self.horizon, self.config)
        applied = state.copy()
        applied.buildings[player, action.lane] += np.array(action.purchases)
        decided = terminal_vector(applied.health, applied.wave_index, self.config)
        if decided is not None:
            return decided
        return vector_from_scores(lane_scores(applied, self.config), self.config)

    def rank_rows(self, state, player: int, k: int) -> np.ndarray:
        rows = legal_action_rows(state, player, self.config)
        if len(rows) == 0:
            return rows
        if self.horizon > 0:
            scores = np.array(
                [
                    scalar_value(
                        self.q_values(state, action_from_row(r), player), player
                    )
                    for r in rows
                ]
            )
        else:
            scores = self._score_rows(state, rows, player)
        order = np.argsort(-scores, kind="stable")
        return rows[order[:k]]

    def rank(self, state, player: int, k: int) -> list[PurchaseAction]:
        return [action_from_row(r) for r in self.rank_rows(state, player, k)]


class ExactValueFunction:
    """Direct decomposed value: the equivariant heuristic (terminal-aware)."""

    kind = "exact"

    def __init__(self, config: GameConfig, horizon: int = 0):
        self.config = config.as_deterministic()
        self.horizon = horizon

    def value4(self, state) -> np.ndarray:
        if self.horizon > 0:
            return _minimax_value(state, self.horizon, self.config)
        return win_probability_vector(state, self.config)

    def value4_rows(self, rows: np.ndarray) -> np.ndarray:
        if self.horizon > 0:
            from ..game import row_to_state

            return np.stack([self.value4(row_to_state(r)) for r in rows])
        return win_probability_rows(rows, self.config)


def _minimax_value(state, depth: int, config: GameConfig) -> np.ndarray:
    decided = terminal_vector(state.health, state.wave_index, config)
    if decided is not None:
        return decided
    if depth == 0:
        return vector_from_scores(lane_scores(state, config), config)
    best = None
    best_scalar = -1.0
    for f_row in legal_action_rows(state, FRIENDLY, config):
        vec = _min_over_enemy(state, action_from_row(f_row), depth, config)
        s = scalar_value(vec, FRIENDLY)
        if s > best_scalar:
            best, best_scalar = vec, s
    return best


def _min_over_enemy(state, friendly, depth, config):
    worst = None
    worst_scalar = 2.0
    for e_row in legal_action_rows(state, ENEMY, config):
        nxt, _ = simulate_wave(state, friendly, action_from_row(e_row), config)
        vec = _minimax_value(nxt, depth - 1, config)
        s = scalar_value(vec, FRIENDLY)
        if s < worst_scalar:
            worst, worst_scalar = vec, s
    return worst


def _minimax_q(state, action, player, depth, config) -> np.ndarray:
    """Exhaustive Q: worst case over the opponent's reply, then minimax."""
    if player == FRIENDLY:
        return _min_over_enemy(state, action, depth, config)
    # Mirror for the enemy: their worst case maximizes the friendly scalar.
    worst = None
    worst_scalar = -1.0
    for f_row in legal_action_rows(state, FRIENDLY, config):
        nxt, _ = simulate_wave(state, action_from_row(f_row), action, config)
        vec = _minimax_value(nxt, depth - 1, config)
        s = scalar_value(vec, FRIENDLY)
        if s > worst_scalar:
            worst, worst_scalar = vec, s
    return worst


# ---------------------------------------------------------------------------
# Learned backend
# ---------------------------------------------------------------------------


class LearnedTransitionModel:
    """Feed-forward dynamics model.

    The network consumes the encoded state plus both action blocks and
    predicts the change in the encoded state (a residual) alongside a
    4-way reward head. Decoding rounds counts to integers and clamps to the
    schema, so predictions stay structurally valid rows.
    """

    kind = "learned"

    def __init__(self, net: DenseNet, config: GameConfig):
        self.net = net
        self.config = config

    def predict(self, state, friendly, enemy):
        x = np.concatenate(
            [
                features.encode_state(state),
                features.encode_action(friendly),
                features.encode_action(enemy),
            ]
        )
        out = self.net.forward(x)[0]
        delta, reward_raw = out[: features.STATE_DIM], out[features.STATE_DIM :]
        nxt = features.decode_state(features.encode_state(state) + delta)
        return nxt, sigmoid(reward_raw)

    def predict_batch(self, states, friendly_rows, enemy_rows):
        xs = np.concatenate(
            [
                features.encode_state_rows(np.stack([state_to_row(s) for s in states])),
                features.encode_action_rows(friendly_rows),
                features.encode_action_rows(enemy_rows),
            ],
            axis=1,
        )
        out = self.net.forward(xs)
        deltas = out[:, : features.STATE_DIM]
        rewards = sigmoid(out[:, features.STATE_DIM :])
        base = features.encode_state_rows(np.stack([state_to_row(s) for s in states]))
        rows = features.decode_state_rows(base + deltas)
        from ..game import row_to_state

        return [row_to_state(r) for r in rows], rewards


class LearnedQRanker:
    """Ranker backed by a Q-network trained from the friendly perspective.

    The enemy's values come from evaluating the same network on the
    player-reversed state and mapping the condition components back.
    """

    kind = "learned"

    def __init__(self, net: DenseNet, config: GameConfig):
        self.net = net
        self.config = config

    def _q_rows(self, state, rows: np.ndarray, player: int) -> np.ndarray:
        view = state if player == FRIENDLY else reverse_players(state)
        sx = features.encode_state(view)
        xs = np.concatenate(
            [np.tile(sx, (len(rows), 1)), features.encode_action_rows(rows)], axis=1
        )
        q = sigmoid(self.net.forward(xs))
        if player == ENEMY:
            q = q[:, [2, 3, 0, 1]]
        return q

    def q_values(self, state, action: PurchaseAction, player: int) -> np.ndarray:
        return self._q_rows(state, action_rows([action]), player)[0]

    def rank_rows(self, state, player: int, k: int) -> np.ndarray:
        rows = legal_action_rows(state, player, self.config)
        if len(rows) == 0:
            return rows
        q = self._q_rows(state, rows, player)
        scores = q[:, 0] + q[:, 1] if player == FRIENDLY else q[:, 2] + q[:, 3]
        order = np.argsort(-scores, kind="stable")
        return rows[order[:k]]

    def rank(self, state, player: int, k: int) -> list[PurchaseAction]:
        return [action_from_row(r) for r in self.rank_rows(state, player, k)]


class LearnedValueFunction:
    """Definitional value: the Q-vector of the best legal action."""

    kind = "learned"

    def __init__(self, ranker: LearnedQRanker, config: GameConfig):
        self.ranker = ranker
        self.config = config

    def value4(self, state) -> np.ndarray:
        rows = legal_action_rows(state, FRIENDLY, self.config)
        if len(rows) == 0:
            # Terminal: fall back to the decided outcome.
            decided = terminal_vector(state.health, state.wave_index, self.config)
            return decided if decided is not None else np.zeros(4)
        q = self.ranker._q_rows(state, rows, FRIENDLY)
        best = int(np.argmax(q[:, 0] + q[:, 1]))
        return q[best]

    def value4_rows(self, rows: np.ndarray) -> np.ndarray:
        from ..game import row_to_state

        return np.stack([self.value4(row_to_state(r)) for r in rows])


# ---------------------------------------------------------------------------
# Bundle
# ---------------------------------------------------------------------------


@dataclass
class ModelBundle:
    """The three pluggable components the planner searches with."""

    transition_model: object
    action_ranker: object
    state_value_fn: object
    config: GameConfig
    diagnostics: dict = field(default_factory=dict)

    @property
    def kinds(self) -> tuple[str, str, str]:
        return (
            self.transition_model.kind,
            self.action_ranker.kind,
            self.state_value_fn.kind,
        )

    def predict_transition(self, state, friendly, enemy):
        check_legal(state, friendly, FRIENDLY, self.config)
        check_legal(state, enemy, ENEMY, self.config)
        return self.transition_model.predict(state, friendly, enemy)

    def predict_transition_batch(self, states, friendly_rows, enemy_rows):
        return self.transition_model.predict_batch(states, friendly_rows, enemy_rows)

    def q_values(self, state, action, player):
        check_legal(state, action, player, self.config)
        return self.action_ranker.q_values(state, action, player)

    def rank_actions(self, state, player, k):
        if k < 1:
            raise ValueError("k must be at least 1")
        return self.action_ranker.rank(state, player, k)

    def rank_action_rows(self, state, player, k):
        return self.action_ranker.rank_rows(state, player, k)

    def value4(self, state) -> np.ndarray:
        return self.state_value_fn.value4(state)

    def value4_rows(self, rows: np.ndarray) -> np.ndarray:
        return self.state_value_fn.value4_rows(rows)

    def state_value(self, state, player) -> float:
        """Definitional state value: best legal action's scalar Q."""
        from ..game import legal_actions

        acts = legal_actions(state, player, self.config)
        if not acts:
            decided = terminal_vector(state.health, state.wave_index, self.config)
            q = decided if decided is not None else np.zeros(4)
            return scalar_value(q, player, self.diagnostics)
        return max(
            scalar_value(self.q_values(state, a, player), player, self.diagnostics)
            for a in acts
        )

    def scalar(self, q4, player) -> float:
        return scalar_value(q4, player, self.diagnostics)

    def describe(self) -> str:
        return "+".join(self.kinds) if len(set(self.kinds)) > 1 else self.kinds[0]


def exact_bundle(config: GameConfig, horizon: int = 0) -> ModelBundle:
    return ModelBundle(
        transition_model=ExactTransitionModel(config),
        action_ranker=ExactRanker(config, horizon),
        state_value_fn=ExactValueFunction(config, horizon),
        config=config.as_deterministic(),
    )


def learned_bundle(
    transition_net: DenseNet, q_net: DenseNet, config: GameConfig
) -> ModelBundle:
    ranker = LearnedQRanker(q_net, config)
    return ModelBundle(
        transition_model=LearnedTransitionModel(transition_net, config),
        action_ranker=ranker,
        state_value_fn=LearnedValueFunction(ranker, config),
        config=config,
    )
