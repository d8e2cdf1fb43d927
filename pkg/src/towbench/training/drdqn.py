"""Decomposed-reward DQN with pool-based self-play.

The Q-network maps (state, action) features to a 4-vector of win-condition
probabilities; each component regresses independently on its own temporal-
difference target r_i + gamma * Q_i(s', a*), where a* maximizes the scalar
(summed friendly components) value under the target network, and the gamma
term vanishes exactly on terminal transitions. The learner plays the
friendly side against uniformly sampled frozen pool members with annealed
epsilon-greedy exploration, stopping early once it beats the pool at the
configured rate or the episode budget runs out.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from ..game import (
    ENEMY,
    FRIENDLY,
    GameConfig,
    initial_state,
    legal_action_rows,
    simulate_wave,
    state_to_row,
)
from ..models import features
from ..models.network import Adam, DenseNet, sigmoid
from .pool import AgentPool, PoolMember


class TrainingDivergence(RuntimeError):
    pass


def _round6(value):
    return None if value is None else round(float(value), 6)


@dataclass
class DQNHyperparams:
    gamma: float = 0.99
    learning_rate: float = 1e-3
    batch_size: int = 64
    buffer_size: int = 100_000
    target_sync_every: int = 1000
    epsilon_start: float = 1.0
    epsilon_end: float = 0.05
    epsilon_anneal_fraction: float = 0.7
    eval_every: int = 250
    eval_games: int = 50
    stop_win_rate: float = 0.8
    hidden: tuple[int, ...] = (256, 128, 64)


class _Replay:
    """Ring buffer over packed transition rows."""

    def __init__(self, capacity: int):
        self.capacity = capacity
        self.state = np.zeros((capacity, 67), dtype=np.int64)
        self.action = np.zeros((capacity, 4), dtype=np.int64)
        self.next_state = np.zeros((capacity, 67), dtype=np.int64)
        self.reward = np.zeros((capacity, 4), dtype=np.float64)
        self.terminal = np.zeros(capacity, dtype=bool)
        self.size = 0
        self.head = 0

    def add(self, state_row, action_row, next_row, reward, terminal):
        i = self.head
        self.state[i] = state_row
        self.action[i] = action_row
        self.next_state[i] = next_row
        self.reward[i] = reward
        self.terminal[i] = terminal
        self.head = (self.head + 1) % self.capacity
        self.size = min(self.size + 1, self.capacity)

    def sample(self, rng, batch):
        idx = rng.integers(0, self.size, size=batch)
        return idx


def _q_forward(net: DenseNet, state_rows: np.ndarray, action_rows: np.ndarray):
    xs = np.concatenate(
        [features.encode_state_rows(state_rows),
         features.encode_action_rows(action_rows)],
        axis=1,
    )
    return xs, sigmoid(net.forward(xs))


def greedy_action_row(net, state, config, rng=None, epsilon=0.0):
    """Epsilon-greedy friendly action over the legal rows."""
    rows = legal_action_rows(state, FRIENDLY, config)
    if epsilon > 0.0 and rng is not None and rng.random() < epsilon:
        return rows[int(rng.integers(len(rows)))]
    state_rows = np.tile(state_to_row(state), (len(rows), 1))
    _, q = _q_forward(net, state_rows, rows)
    scores = q[:, 0] + q[:, 1]
    return rows[int(np.argmax(scores))]


def _best_next_q(target_net, next_rows, terminal, config):
    """Per-component Q of the scalar-best action in each next state."""
    out = np.zeros((len(next_rows), 4))
    from ..game import row_to_state

    for i, row in enumerate(next_rows):
        if terminal[i]:
            continue
        state = row_to_state(row)
        rows = legal_action_rows(state, FRIENDLY, config)
        if len(rows) == 0:
            continue
        state_rows = np.tile(row, (len(rows), 1))
        _, q = _q_forward(target_net, state_rows, rows)
        out[i] = q[int(np.argmax(q[:, 0] + q[:, 1]))]
    return out


def compute_targets(reward, next_q, terminal, gamma):
    """Per-component regression targets; the gamma term vanishes exactly on
    terminal transitions."""
    return reward + (~terminal[:, None]) * gamma * next_q


def train_drdqn(
    pool: AgentPool,
    budget_episodes: int,
    hp: DQNHyperparams,
    config: GameConfig,
    rng: np.random.Generator,
) -> tuple[DenseNet, list[dict]]:
    """Train one Q-net against the pool; returns (net, history rows)."""
    if len(pool) == 0:
        raise ValueError("pool must be seeded with at least one member")
    in_dim = features.STATE_DIM + features.ACTION_DIM
    net = DenseNet([in_dim, *hp.hidden, 4], seed=int(rng.integers(2**31)))
    if budget_episodes <= 0:
        return net, []

    target = net.copy()
    optimizer = Adam(net.params(), lr=hp.learning_rate)
    replay = _Replay(hp.buffer_size)
    history: list[dict] = []
    steps = 0
    anneal_steps = max(1, int(budget_episodes * hp.epsilon_anneal_fraction))

    for episode in range(budget_episodes):
        frac = min(1.0, episode / anneal_steps)
        epsilon = hp.epsilon_start + (hp.epsilon_end - hp.epsilon_start) * frac
        opponent = pool.sample(rng)
        state = initial_state(config)
        outcome = None
        losses = []
        while outcome is None:
            action_row = greedy_action_row(net, state, config, rng, epsilon)
            from ..game import action_from_row

            friendly = action_from_row(action_row)
            enemy = opponent.act(state, ENEMY, config, rng)
            sim_rng = rng if config.jitter > 0 else None
            next_state, outcome = simulate_wave(state, friendly, enemy, config,
                                                sim_rng)
            reward = (np.zeros(4) if outcome is None
                      else np.array(outcome.reward_vector))
            replay.add(state_to_row(state), action_row, state_to_row(next_state),
                       reward, outcome is not None)
            state = next_state

            if replay.size >= hp.batch_size:
                idx = replay.sample(rng, hp.batch_size)
                next_q = _best_next_q(target, replay.next_state[idx],
                                      replay.terminal[idx], config)
                targets = compute_targets(replay.reward[idx], next_q,
                                          replay.terminal[idx], hp.gamma)
                xs, q = _q_forward(net, replay.state[idx], replay.action[idx])
                err = q - targets
                component_loss = (err**2).mean(axis=0)
                if not np.isfinite(component_loss).all():
                    raise TrainingDivergence(
                        f"non-finite loss at episode {episode}, step {steps}: "
                        f"{component_loss}"
                    )
                losses.append(component_loss)
                # MSE through the sigmoid head
                grad_z = (2.0 / err.size) * err * q * (1.0 - q)
                out, acts = net.forward_cached(xs)
                grads_w, grads_b = net.backward(acts, grad_z)
                optimizer.step(net.params(), grads_w + grads_b)
                steps += 1
                if steps % hp.target_sync_every == 0:
                    target.load_from(net)

        mean_loss = np.mean(losses, axis=0) if losses else [None] * 4
        row = {
            "episode": episode,
            "epsilon": round(epsilon, 4),
            "lossTopLane": _round6(mean_loss[0]),
            "lossBottomLane": _round6(mean_loss[1]),
            "lossEnemyTopLane": _round6(mean_loss[2]),
            "lossEnemyBottomLane": _round6(mean_loss[3]),
            "winRateVsPool": None,
        }
        if (episode + 1) % hp.eval_every == 0 or episode == budget_episodes - 1:
            win_rate = evaluate_vs_pool(net, pool, hp.eval_games, config,
                                        np.random.default_rng(rng.integers(2**31)))
            row["winRateVsPool"] = win_rate
            history.append(row)
            if win_rate >= hp.stop_win_rate:
                break
        else:
            history.append(row)
    return net, history


def evaluate_vs_pool(net, pool, games, config, rng) -> float:
    wins = 0
    from ..game import action_from_row

    for _ in range(games):
        opponent = pool.sample(rng)
        state = initial_state(config)
        outcome = None
        while outcome is None:
            friendly = action_from_row(greedy_action_row(net, state, config))
            enemy = opponent.act(state, ENEMY, config, rng)
            sim_rng = rng if config.jitter > 0 else None
            state, outcome = simulate_wave(state, friendly, enemy, config, sim_rng)
        if outcome.winner == FRIENDLY:
            wins += 1
    return wins / games


def run_pool_training(
    config: GameConfig,
    rounds: int,
    episodes_per_round: int,
    hp: DQNHyperparams,
    rng: np.random.Generator,
) -> tuple[AgentPool, list[dict]]:
    """Grow a pool by training successive agents against it."""
    pool = AgentPool(config)
    history: list[dict] = []
    for r in range(rounds):
        net, rows = train_drdqn(pool, episodes_per_round, hp, config, rng)
        win_rate = evaluate_vs_pool(
            net, pool, hp.eval_games, config,
            np.random.default_rng(rng.integers(2**31)),
        )
        pool.add(net, win_rate)
        for row in rows:
            row["round"] = r
        history.extend(rows)
    return pool, history
