"""Dynamics-model training: supervised regression from recorded
transitions.

The network consumes (state, friendly action, enemy action) features and
predicts the change in the encoded state plus a 4-way reward head: squared
error on the state block, cross-entropy on the reward head. A held-out
split reports per-attribute validation error, compared against the
predict-no-change baseline that any useful dynamics model must beat.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..game import ENEMY, FRIENDLY, GameConfig, state_to_row
from ..harness import RandomAgent, play_episode
from ..models import features
from ..models.network import Adam, DenseNet, sigmoid
from .pool import AgentPool
from ..records import TransitionRecord


class TrainingDivergence(RuntimeError):
    pass


@dataclass
class DynamicsHyperparams:
    learning_rate: float = 1e-3
    batch_size: int = 64
    epochs: int = 80
    hidden: tuple[int, ...] = (256, 128, 64)
    validation_fraction: float = 0.2


def collect_dynamics_dataset(
    pool: AgentPool,
    num_episodes: int,
    random_agent_fraction: float,
    config: GameConfig,
    rng: np.random.Generator,
) -> list[TransitionRecord]:
    """Play episodes pairing pool members and random agents; every wave
    becomes one record. With fraction 1.0 no pool agent is ever selected."""
    if num_episodes < 1:
        raise ValueError("need at least one episode")
    if not 0.0 <= random_agent_fraction <= 1.0:
        raise ValueError("random agent fraction must lie in [0, 1]")

    random_agent = RandomAgent()

    class _PoolSide:
        def __init__(self, member):
            self.member = member

        def act(self, state, player, cfg, agent_rng):
            return self.member.act(state, player, cfg, agent_rng)

    records: list[TransitionRecord] = []
    for _ in range(num_episodes):
        sides = []
        for _side in range(2):
            if rng.random() < random_agent_fraction:
                sides.append(random_agent)
            else:
                sides.append(_PoolSide(pool.sample(rng)))
        result = play_episode(config, sides[0], sides[1], rng)
        records.extend(result.transitions)
    return records


def _encode_dataset(records: list[TransitionRecord]):
    state_rows = np.stack([state_to_row(r.state) for r in records])
    next_rows = np.stack([state_to_row(r.next_state) for r in records])
    from ..game import action_rows

    af = action_rows([r.friendly for r in records])
    ae = action_rows([r.enemy for r in records])
    xs = np.concatenate(
        [
            features.encode_state_rows(state_rows),
            features.encode_action_rows(af),
            features.encode_action_rows(ae),
        ],
        axis=1,
    )
    delta = features.encode_state_rows(next_rows) - features.encode_state_rows(
        state_rows
    )
    rewards = np.stack([r.reward_vector for r in records])
    return xs, delta, rewards, state_rows, next_rows


def train_dynamics(
    records: list[TransitionRecord],
    hp: DynamicsHyperparams,
    rng: np.random.Generator,
) -> tuple[DenseNet, dict]:
    """Returns (net, validation report)."""
    if not records:
        raise ValueError("dataset is empty")
    xs, delta, rewards, state_rows, next_rows = _encode_dataset(records)
    n = len(xs)
    order = rng.permutation(n)
    n_val = max(1, int(n * hp.validation_fraction)) if n > 1 else 0
    val_idx = order[:n_val]
    train_idx = order[n_val:] if n_val < n else order

    out_dim = features.STATE_DIM + 4
    in_dim = xs.shape[1]
    net = DenseNet([in_dim, *hp.hidden, out_dim], seed=int(rng.integers(2**31)))
    optimizer = Adam(net.params(), lr=hp.learning_rate)

    for epoch in range(hp.epochs):
        perm = rng.permutation(len(train_idx))
        for start in range(0, len(perm), hp.batch_size):
            batch = train_idx[perm[start : start + hp.batch_size]]
            x = xs[batch]
            out, acts = net.forward_cached(x)
            pred_delta = out[:, : features.STATE_DIM]
            reward_logits = out[:, features.STATE_DIM :]
            reward_prob = sigmoid(reward_logits)

            err_state = pred_delta - delta[batch]
            loss = float((err_state**2).mean())
            if not np.isfinite(loss):
                raise TrainingDivergence(
                    f"non-finite state loss at epoch {epoch}"
                )
            grad = np.zeros_like(out)
            grad[:, : features.STATE_DIM] = (2.0 / err_state.size) * err_state
            # cross-entropy through the sigmoid head
            grad[:, features.STATE_DIM :] = (
                reward_prob - rewards[batch]
            ) / len(batch)
            grads_w, grads_b = net.backward(acts, grad)
            optimizer.step(net.params(), grads_w + grads_b)

    report = validation_report(net, xs, state_rows, next_rows, rewards, val_idx)
    report["trainRecords"] = int(len(train_idx))
    report["validationRecords"] = int(len(val_idx))
    return net, report


def validation_report(net, xs, state_rows, next_rows, rewards, val_idx) -> dict:
    """Per-attribute validation error plus the no-change baseline."""
    if len(val_idx) == 0:
        val_idx = np.arange(len(xs))
    out = net.forward(xs[val_idx])
    pred_delta = out[:, : features.STATE_DIM]
    base = features.encode_state_rows(state_rows[val_idx])
    decoded = features.decode_state_rows(base + pred_delta)
    truth = next_rows[val_idx]
    baseline = state_rows[val_idx]  # predict no change

    abs_err = np.abs(decoded - truth)
    abs_err_baseline = np.abs(baseline - truth)

    def block(name, sl):
        return {
            f"{name}MAE": float(abs_err[:, sl].mean()),
            f"{name}BaselineMAE": float(abs_err_baseline[:, sl].mean()),
        }

    report = {}
    report.update(block("health", slice(0, 4)))
    report.update(block("buildings", slice(4, 16)))
    report.update(block("units", slice(16, 64)))
    report.update(block("currency", slice(64, 66)))
    report.update(block("waveIndex", slice(66, 67)))

    reward_prob = sigmoid(out[:, features.STATE_DIM :])
    report["rewardMAE"] = float(np.abs(reward_prob - rewards[val_idx]).mean())
    nonterminal = rewards[val_idx].sum(axis=1) == 0
    if nonterminal.any():
        report["rewardNonTerminalMean"] = float(
            reward_prob[nonterminal].mean()
        )
    return report
