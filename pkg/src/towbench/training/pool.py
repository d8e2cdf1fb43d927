"""Agent pool for self-play training.

The pool is an ordered, append-only list of frozen opponents: it starts
with a uniform-random policy and grows with trained Q-net snapshots. Every
snapshot reloads bit-exactly from disk.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from ..game import GameConfig, legal_action_rows, legal_actions
from ..models import LearnedQRanker, load_net, save_net
from ..models.network import DenseNet


@dataclass
class PoolMember:
    name: str
    kind: str  # "random" | "q"
    net: DenseNet | None = None
    win_rate: float | None = None

    def act(self, state, player, config, rng):
        if self.kind == "random":
            acts = legal_actions(state, player, config)
            return acts[int(rng.integers(len(acts)))]
        ranker = LearnedQRanker(self.net, config)
        return ranker.rank(state, player, 1)[0]


class AgentPool:
    """Append-only opponent pool; member 0 is always the random policy."""

    def __init__(self, config: GameConfig):
        self.config = config
        self.members: list[PoolMember] = [PoolMember("random-0", "random")]

    def __len__(self) -> int:
        return len(self.members)

    def add(self, net: DenseNet, win_rate: float | None = None) -> PoolMember:
        member = PoolMember(f"q-{len(self.members)}", "q", net.copy(), win_rate)
        self.members.append(member)
        return member

    def sample(self, rng: np.random.Generator) -> PoolMember:
        return self.members[int(rng.integers(len(self.members)))]

    def best(self) -> PoolMember:
        return self.members[-1]

    def save(self, directory: str | Path) -> None:
        directory = Path(directory)
        directory.mkdir(parents=True, exist_ok=True)
        manifest = []
        for i, member in enumerate(self.members):
            entry = {"name": member.name, "kind": member.kind,
                     "winRate": member.win_rate}
            if member.kind == "q":
                filename = f"member-{i}.npz"
                save_net(member.net, directory / filename,
                         meta={"name": member.name})
                entry["file"] = filename
            manifest.append(entry)
        (directory / "pool.json").write_text(json.dumps(manifest, indent=2))

    @classmethod
    def load(cls, directory: str | Path, config: GameConfig) -> "AgentPool":
        directory = Path(directory)
        manifest = json.loads((directory / "pool.json").read_text())
        pool = cls(config)
        pool.members = []
        for entry in manifest:
            member = PoolMember(entry["name"], entry["kind"],
                                win_rate=entry.get("winRate"))
            if entry["kind"] == "q":
                member.net, _ = load_net(directory / entry["file"])
            pool.members.append(member)
        if not pool.members:
            raise ValueError("pool manifest is empty")
        return pool
