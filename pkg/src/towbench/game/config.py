"""Game configuration: unit economics, combat tables, pacing, and RNG policy.

All numbers live here so the simulator itself stays free of magic values.
Configs are immutable and hashable; the content hash ties stored episodes
back to the exact rules they were played under.
"""

from __future__ import annotations

import hashlib
from dataclasses import dataclass, replace
from pathlib import Path

UNIT_TYPES = ("marine", "baneling", "immortal")
LANES = ("top", "bottom")
PLAYERS = ("friendly", "enemy")

MARINE, BANELING, IMMORTAL = 0, 1, 2
TOP, BOTTOM = 0, 1
FRIENDLY, ENEMY = 0, 1

#: Number of grid cells per lane. Cell 1 is adjacent to the friendly base,
#: cell 4 adjacent to the enemy base, in both lanes.
GRID_CELLS = 4

#: Schema-wide maxima used for feature scaling and range rules. These are
#: fixed regardless of the config actually played (a shrunken config still
#: stores rows against the full schema).
SCHEMA_MAX_HEALTH = 2000
SCHEMA_MAX_WAVES = 40


class ConfigError(ValueError):
    """Raised when a GameConfig violates its invariants."""


@dataclass(frozen=True)
class GameConfig:
    """Immutable rule set for one game.

    ``damage[a][d]`` is per-tick damage an attacker of type ``a`` deals to a
    defender of type ``d``. ``base_damage[u]`` is per-tick damage a unit of
    type ``u`` deals to the opposing base from the adjacent cell.
    """

    unit_cost: tuple[int, int, int] = (50, 75, 200)
    unit_hp: tuple[int, int, int] = (50, 40, 200)
    damage: tuple[tuple[int, int, int], ...] = (
        (10, 10, 30),   # marine  -> (marine, baneling, immortal)
        (40, 10, 10),   # baneling
        (10, 35, 10),   # immortal
    )
    base_damage: tuple[int, int, int] = (5, 3, 15)
    ticks_per_cell: tuple[int, int, int] = (5, 5, 5)
    income_per_wave: int = 100
    ticks_per_wave: int = 30
    base_health: int = 2000
    max_waves: int = 40
    starting_currency: int = 100
    damage_jitter_fraction: float = 0.2
    deterministic: bool = False
    rng_seed: int = 0
    action_cap: int = 2000

    def __post_init__(self) -> None:
        if len(self.unit_cost) != 3 or any(c <= 0 for c in self.unit_cost):
            raise ConfigError("unit costs must be three strictly positive integers")
        if len(self.unit_hp) != 3 or any(h <= 0 for h in self.unit_hp):
            raise ConfigError("unit HP must be three strictly positive integers")
        if len(self.damage) != 3 or any(
            len(row) != 3 or any(d <= 0 for d in row) for row in self.damage
        ):
            raise ConfigError("damage matrix must be 3x3 strictly positive")
        if any(d <= 0 for d in self.base_damage):
            raise ConfigError("base damage must be strictly positive")
        if any(t <= 0 for t in self.ticks_per_cell):
            raise ConfigError("ticks per cell must be strictly positive")
        if not 0.0 <= self.damage_jitter_fraction < 1.0:
            raise ConfigError("damage jitter fraction must lie in [0, 1)")
        if self.income_per_wave < 0 or self.starting_currency < 0:
            raise ConfigError("income and starting currency must be non-negative")
        if self.ticks_per_wave <= 0:
            raise ConfigError("ticks per wave must be strictly positive")
        if not 0 < self.base_health <= SCHEMA_MAX_HEALTH:
            raise ConfigError(f"base health must lie in (0, {SCHEMA_MAX_HEALTH}]")
        if not 0 < self.max_waves <= SCHEMA_MAX_WAVES:
            raise ConfigError(f"max waves must lie in (0, {SCHEMA_MAX_WAVES}]")
        if self.action_cap < 1:
            raise ConfigError("action cap must be at least 1")

    @property
    def jitter(self) -> float:
        """Effective jitter: deterministic mode forces it to zero."""
        return 0.0 if self.deterministic else self.damage_jitter_fraction

    def as_deterministic(self) -> "GameConfig":
        return replace(self, deterministic=True)

    def content_hash(self) -> str:
        return hashlib.sha256(to_text(self).encode()).hexdigest()[:16]


def default_config(**overrides) -> GameConfig:
    return replace(GameConfig(), **overrides) if overrides else GameConfig()


def small_config(**overrides) -> GameConfig:
    """Shrunken ruleset for fast training and match harnesses."""
    cfg = GameConfig(base_health=200, max_waves=10)
    return replace(cfg, **overrides) if overrides else cfg


_SCALAR_FIELDS = {
    "income_per_wave": int,
    "ticks_per_wave": int,
    "base_health": int,
    "max_waves": int,
    "starting_currency": int,
    "damage_jitter_fraction": float,
    "deterministic": bool,
    "rng_seed": int,
    "action_cap": int,
}


def to_text(config: GameConfig) -> str:
    """Render a config in the plain-text key-value format."""
    lines = []
    for field, kind in _SCALAR_FIELDS.items():
        value = getattr(config, field)
        if kind is bool:
            value = "true" if value else "false"
        lines.append(f"{field} = {value}")
    for i, unit in enumerate(UNIT_TYPES):
        lines.append(f"unit_cost.{unit} = {config.unit_cost[i]}")
    for i, unit in enumerate(UNIT_TYPES):
        lines.append(f"unit_hp.{unit} = {config.unit_hp[i]}")
    for i, unit in enumerate(UNIT_TYPES):
        lines.append(f"base_damage.{unit} = {config.base_damage[i]}")
    for i, unit in enumerate(UNIT_TYPES):
        lines.append(f"ticks_per_cell.{unit} = {config.ticks_per_cell[i]}")
    for a, attacker in enumerate(UNIT_TYPES):
        for d, defender in enumerate(UNIT_TYPES):
            lines.append(f"damage.{attacker}.{defender} = {config.damage[a][d]}")
    return "\n".join(lines) + "\n"


def parse_text(text: str) -> GameConfig:
    """Parse the key-value config format. Unknown keys are rejected."""
    values: dict[str, str] = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"line {lineno}: expected 'key = value', got {raw!r}")
        key, _, value = line.partition("=")
        values[key.strip()] = value.strip()

    unit_index = {u: i for i, u in enumerate(UNIT_TYPES)}
    kwargs: dict = {}
    per_unit: dict[str, list] = {
        "unit_cost": list(GameConfig.unit_cost),
        "unit_hp": list(GameConfig.unit_hp),
        "base_damage": list(GameConfig.base_damage),
        "ticks_per_cell": list(GameConfig.ticks_per_cell),
    }
    damage = [list(row) for row in GameConfig.damage]

    for key, value in values.items():
        parts = key.split(".")
        if parts[0] in _SCALAR_FIELDS and len(parts) == 1:
            kind = _SCALAR_FIELDS[key]
            if kind is bool:
                if value.lower() not in ("true", "false"):
                    raise ConfigError(f"{key}: expected true/false, got {value!r}")
                kwargs[key] = value.lower() == "true"
            else:
                kwargs[key] = kind(value)
        elif parts[0] in per_unit and len(parts) == 2 and parts[1] in unit_index:
            per_unit[parts[0]][unit_index[parts[1]]] = int(value)
        elif (
            parts[0] == "damage"
            and len(parts) == 3
            and parts[1] in unit_index
            and parts[2] in unit_index
        ):
            damage[unit_index[parts[1]]][unit_index[parts[2]]] = int(value)
        else:
            raise ConfigError(f"unknown config key: {key}")

    kwargs["unit_cost"] = tuple(per_unit["unit_cost"])
    kwargs["unit_hp"] = tuple(per_unit["unit_hp"])
    kwargs["base_damage"] = tuple(per_unit["base_damage"])
    kwargs["ticks_per_cell"] = tuple(per_unit["ticks_per_cell"])
    kwargs["damage"] = tuple(tuple(row) for row in damage)
    return GameConfig(**kwargs)


def load_config(path: str | Path) -> GameConfig:
    return parse_text(Path(path).read_text())


def save_config(config: GameConfig, path: str | Path) -> None:
    Path(path).write_text(to_text(config))
