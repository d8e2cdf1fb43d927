"""Flaw injection: named, parameterized perturbations wrapped around a base
backend, applied after prediction.

Injected flaws give the acceptance suite reproducible ground truth: a rule
aimed at a flaw family must report matches on episodes played with that
flaw, and the exact backend must stay clean. Perturbation decisions are
derived from a hash of the call inputs and the flaw seed, never from shared
RNG state, so repeated inference on identical inputs is identical — planner
trees stay deterministic and counterfactual materialization reproduces the
recorded outputs.

Supported flaw kinds:
  healthInflation(lane, player, amount, probability)
  phantomUnits(unitType, count)
  asymmetryNoise(scale)
  winProbLeak(epsilon)
  invertRanking()
"""

from __future__ import annotations

import hashlib
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from ..game import (
    FRIENDLY,
    GRID_CELLS,
    LANES,
    PLAYERS,
    UNIT_TYPES,
    AbstractState,
    GameConfig,
    PurchaseAction,
)
from .backends import ModelBundle

FLAW_KINDS = (
    "healthInflation",
    "phantomUnits",
    "asymmetryNoise",
    "winProbLeak",
    "invertRanking",
)


@dataclass(frozen=True)
class FlawSpec:
    kind: str
    lane: int = 0
    player: int = 0
    amount: int = 0
    probability: float = 1.0
    unit_type: int = 0
    count: int = 0
    scale: float = 1.0
    epsilon: float = 0.0

    def __post_init__(self):
        if self.kind not in FLAW_KINDS:
            raise ValueError(f"unknown flaw kind {self.kind!r}")


def health_inflation(lane: int, player: int, amount: int, probability: float) -> FlawSpec:
    return FlawSpec("healthInflation", lane=lane, player=player,
                    amount=amount, probability=probability)


def phantom_units(unit_type: int, count: int) -> FlawSpec:
    return FlawSpec("phantomUnits", unit_type=unit_type, count=count)


def asymmetry_noise(scale: float) -> FlawSpec:
    return FlawSpec("asymmetryNoise", scale=scale)


def win_prob_leak(epsilon: float) -> FlawSpec:
    return FlawSpec("winProbLeak", epsilon=epsilon)


def invert_ranking() -> FlawSpec:
    return FlawSpec("invertRanking")


def _call_rng(seed: int, tag: str, *parts: bytes) -> np.random.Generator:
    h = hashlib.blake2b(digest_size=8)
    h.update(seed.to_bytes(8, "little", signed=True))
    h.update(tag.encode())
    for part in parts:
        h.update(part)
    return np.random.default_rng(int.from_bytes(h.digest(), "little"))


def _action_bytes(action: PurchaseAction) -> bytes:
    return bytes([action.lane, *action.purchases[:3]])


class FlawedTransitionModel:
    def __init__(self, base, flaws: list[FlawSpec], seed: int, config: GameConfig):
        self.base = base
        self.flaws = [f for f in flaws if f.kind in
                      ("healthInflation", "phantomUnits", "asymmetryNoise")]
        self.seed = seed
        self.config = config
        self.kind = f"flawed({base.kind})"

    def predict(self, state, friendly, enemy):
        nxt, reward = self.base.predict(state, friendly, enemy)
        key = (state.key_bytes(), _action_bytes(friendly), _action_bytes(enemy))
        nxt = nxt.copy()
        for flaw in self.flaws:
            rng = _call_rng(self.seed, flaw.kind, *key)
            if flaw.kind == "healthInflation":
                if rng.random() < flaw.probability:
                    nxt.health[flaw.player, flaw.lane] += flaw.amount
            elif flaw.kind == "phantomUnits":
                self._apply_phantom(nxt, flaw, rng)
            elif flaw.kind == "asymmetryNoise":
                self._apply_noise(nxt, flaw, rng)
        return nxt, reward

    def predict_batch(self, states, friendly_rows, enemy_rows):
        from ..game import action_from_row

        outs, rewards = [], []
        for s, fr, er in zip(states, friendly_rows, enemy_rows):
            nxt, r = self.predict(s, action_from_row(fr), action_from_row(er))
            outs.append(nxt)
            rewards.append(r)
        return outs, np.stack(rewards)

    @staticmethod
    def _apply_phantom(state: AbstractState, flaw: FlawSpec, rng) -> None:
        # Place impossible units: the acting player has no production of
        # that type in the chosen lane, so causality rules must fire.
        lanes = [
            lane
            for lane in range(2)
            if state.buildings[FRIENDLY, lane, flaw.unit_type] == 0
        ]
        if not lanes:
            return
        lane = lanes[int(rng.integers(len(lanes)))]
        grid = int(rng.integers(GRID_CELLS))
        state.units[FRIENDLY, lane, flaw.unit_type, grid] += flaw.count

    @staticmethod
    def _apply_noise(state: AbstractState, flaw: FlawSpec, rng) -> None:
        # Additive unit-count noise keyed to the untransformed inputs; the
        # same transition re-inferred on flipped or reversed inputs draws
        # different noise, so symmetry rules catch it.
        magnitude = max(1, round(flaw.scale))
        for _ in range(3):
            p = int(rng.integers(2))
            lane = int(rng.integers(2))
            u = int(rng.integers(3))
            g = int(rng.integers(GRID_CELLS))
            state.units[p, lane, u, g] += int(rng.integers(1, magnitude + 1))


class FlawedRanker:
    def __init__(self, base, flaws: list[FlawSpec], seed: int, config: GameConfig):
        self.base = base
        self.leak = sum(f.epsilon for f in flaws if f.kind == "winProbLeak")
        self.inverted = any(f.kind == "invertRanking" for f in flaws)
        self.config = config
        self.kind = f"flawed({base.kind})"

    def q_values(self, state, action, player):
        q = self.base.q_values(state, action, player)
        if self.leak:
            q = np.clip(q + self.leak, 0.0, 1.0)
        return q

    def rank_rows(self, state, player, k):
        if not self.inverted:
            return self.base.rank_rows(state, player, k)
        full = self.base.rank_rows(state, player, 10**9)
        return full[::-1][:k].copy()

    def rank(self, state, player, k):
        from ..game import action_from_row

        return [action_from_row(r) for r in self.rank_rows(state, player, k)]


class FlawedValueFunction:
    def __init__(self, base, flaws: list[FlawSpec], seed: int, config: GameConfig):
        self.base = base
        self.leak = sum(f.epsilon for f in flaws if f.kind == "winProbLeak")
        self.config = config
        self.kind = f"flawed({base.kind})"

    def value4(self, state):
        v = self.base.value4(state)
        if self.leak:
            v = np.clip(v + self.leak, 0.0, 1.0)
        return v

    def value4_rows(self, rows):
        v = self.base.value4_rows(rows)
        if self.leak:
            v = np.clip(v + self.leak, 0.0, 1.0)
        return v


def flawed_bundle(base: ModelBundle, flaws: list[FlawSpec], seed: int = 0) -> ModelBundle:
    cfg = base.config
    return ModelBundle(
        transition_model=FlawedTransitionModel(base.transition_model, flaws, seed, cfg),
        action_ranker=FlawedRanker(base.action_ranker, flaws, seed, cfg),
        state_value_fn=FlawedValueFunction(base.state_value_fn, flaws, seed, cfg),
        config=cfg,
    )


# ---------------------------------------------------------------------------
# Flaw spec files (same key-value format as game configs)
# ---------------------------------------------------------------------------

_LANE_INDEX = {name: i for i, name in enumerate(LANES)}
_PLAYER_INDEX = {name: i for i, name in enumerate(PLAYERS)}
_UNIT_INDEX = {name: i for i, name in enumerate(UNIT_TYPES)}


def parse_flaw_text(text: str) -> tuple[list[FlawSpec], int]:
    """Parse a flaw spec file; returns (flaws, seed)."""
    grouped: dict[str, dict[str, str]] = {}
    seed = 0
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ValueError(f"line {lineno}: expected 'key = value'")
        key, _, value = line.partition("=")
        key, value = key.strip(), value.strip()
        if key == "seed":
            seed = int(value)
            continue
        if "." not in key:
            raise ValueError(f"line {lineno}: expected '<flawKind>.<param>'")
        kind, _, param = key.partition(".")
        grouped.setdefault(kind, {})[param] = value

    flaws = []
    for kind, params in grouped.items():
        if kind == "healthInflation":
            flaws.append(health_inflation(
                _LANE_INDEX[params["lane"]],
                _PLAYER_INDEX[params["player"]],
                int(params["amount"]),
                float(params.get("probability", 1.0)),
            ))
        elif kind == "phantomUnits":
            flaws.append(phantom_units(
                _UNIT_INDEX[params["unitType"]], int(params["count"])
            ))
        elif kind == "asymmetryNoise":
            flaws.append(asymmetry_noise(float(params["scale"])))
        elif kind == "winProbLeak":
            flaws.append(win_prob_leak(float(params["epsilon"])))
        elif kind == "invertRanking":
            flaws.append(invert_ranking())
        else:
            raise ValueError(f"unknown flaw kind {kind!r}")
    return flaws, seed


def load_flaw_file(path: str | Path) -> tuple[list[FlawSpec], int]:
    return parse_flaw_text(Path(path).read_text())
