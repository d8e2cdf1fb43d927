"""Agents and the match harness.

Games are seeded and fully reproducible: each episode derives its own RNG
stream, agents receive explicit generators, and a planner playing the
friendly side leaves one search tree per decision point as the auditable
record of why it acted.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .game import (
    ENEMY,
    FRIENDLY,
    AbstractState,
    GameConfig,
    Outcome,
    PurchaseAction,
    initial_state,
    legal_actions,
    reverse_players,
    simulate_wave,
)
from .models import ModelBundle
from .planner import DEFAULT_WIDTHS, SearchTree, build_tree
from .records import TransitionRecord


class RandomAgent:
    """Uniform choice over the legal purchase list."""

    name = "random"

    def act(self, state, player, config, rng) -> PurchaseAction:
        acts = legal_actions(state, player, config)
        return acts[int(rng.integers(len(acts)))]


class PlannerAgent:
    """Depth-2 minimax over a model bundle; records its trees when playing
    the friendly side."""

    def __init__(self, bundle: ModelBundle, widths=DEFAULT_WIDTHS):
        self.bundle = bundle
        self.widths = widths
        self.name = f"planner({bundle.describe()})"
        self.last_tree: SearchTree | None = None

    def act(self, state, player, config, rng) -> PurchaseAction:
        view = state if player == FRIENDLY else reverse_players(state)
        tree = build_tree(self.bundle, view, self.widths)
        self.last_tree = tree if player == FRIENDLY else None
        return tree.chosen_action


class GreedyQAgent:
    """Epsilon-greedy over a ranker's action values."""

    def __init__(self, bundle: ModelBundle, epsilon: float = 0.0, name="greedy-q"):
        self.bundle = bundle
        self.epsilon = epsilon
        self.name = name

    def act(self, state, player, config, rng) -> PurchaseAction:
        acts = legal_actions(state, player, config)
        if self.epsilon > 0.0 and rng.random() < self.epsilon:
            return acts[int(rng.integers(len(acts)))]
        return self.bundle.rank_actions(state, player, 1)[0]


@dataclass
class EpisodeResult:
    outcome: Outcome
    wave_count: int
    transitions: list[TransitionRecord]
    trees: list[SearchTree] = field(default_factory=list)

    @property
    def friendly_won(self) -> bool:
        return self.outcome.winner == FRIENDLY


def play_episode(
    config: GameConfig,
    friendly_agent,
    enemy_agent,
    rng: np.random.Generator,
    record_trees: bool = False,
    record_transitions: bool = True,
    max_decisions: int | None = None,
) -> EpisodeResult:
    """Play one full game. The rng drives agent choices and, in stochastic
    configs, combat jitter."""
    state = initial_state(config)
    transitions: list[TransitionRecord] = []
    trees: list[SearchTree] = []
    outcome = None
    waves = 0
    while outcome is None:
        af = friendly_agent.act(state, FRIENDLY, config, rng)
        if record_trees and getattr(friendly_agent, "last_tree", None) is not None:
            tree = friendly_agent.last_tree
            tree.decision_index = waves
            trees.append(tree)
        ae = enemy_agent.act(state, ENEMY, config, rng)
        sim_rng = rng if config.jitter > 0 else None
        next_state, outcome = simulate_wave(state, af, ae, config, sim_rng)
        if record_transitions:
            reward = (
                np.zeros(4)
                if outcome is None
                else np.array(outcome.reward_vector, dtype=np.float64)
            )
            transitions.append(TransitionRecord(state, af, ae, next_state, reward))
        state = next_state
        waves += 1
        if max_decisions is not None and waves >= max_decisions and outcome is None:
            # harness-level cutoff for training loops; not a game rule
            break
    if outcome is None:
        outcome = Outcome(ENEMY, "timeoutLowestHealth", (0.0, 0.0, 0.0, 0.0))
    return EpisodeResult(outcome, waves, transitions, trees)


def play_match(
    config: GameConfig,
    friendly_agent,
    enemy_agent,
    games: int,
    seed: int,
    record_trees: bool = False,
) -> tuple[float, list[EpisodeResult]]:
    """Play a seeded match; returns (friendly win rate, episode results)."""
    results = []
    root = np.random.SeedSequence(seed)
    for child in root.spawn(games):
        rng = np.random.default_rng(child)
        results.append(
            play_episode(config, friendly_agent, enemy_agent, rng,
                         record_trees=record_trees)
        )
    wins = sum(1 for r in results if r.friendly_won)
    return wins / games, results
