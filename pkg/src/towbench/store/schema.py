"""Relational schema: column names, aliases, and rule namespaces.

Column naming follows the store convention used throughout the workbench
(friendlyMarineBldgsTop, enemyImmortalBottomGrid4, ...). Win-probability
columns have canonical lane-phrased names plus base-phrased aliases, so
rules written either way resolve to the same storage.
"""

from __future__ import annotations

from ..game import STATE_ATTRIBUTES

SCHEMA_VERSION = 1

STATE_COLUMNS: tuple[str, ...] = STATE_ATTRIBUTES

ACTION_COLUMNS: tuple[str, ...] = (
    "numOfMarineBldgsPurchasedByFriendly",
    "numOfBanelingBldgsPurchasedByFriendly",
    "numOfImmortalBldgsPurchasedByFriendly",
    "laneOfFriendly",
    "numOfMarineBldgsPurchasedByEnemy",
    "numOfBanelingBldgsPurchasedByEnemy",
    "numOfImmortalBldgsPurchasedByEnemy",
    "laneOfEnemy",
)

WINPROB_COLUMNS: tuple[str, ...] = (
    "probabilityOfWinInTopLane",
    "probabilityOfWinInBottomLane",
    "probabilityOfEnemyWinInTopLane",
    "probabilityOfEnemyWinInBottomLane",
)

#: Base-phrased spellings map 1:1 onto the canonical lane-phrased columns.
WINPROB_ALIASES: dict[str, str] = {
    "probabilityOfDestroyingEnemyTopBase": "probabilityOfWinInTopLane",
    "probabilityOfDestroyingEnemyBottomBase": "probabilityOfWinInBottomLane",
    "probabilityOfDestroyingFriendlyTopBase": "probabilityOfEnemyWinInTopLane",
    "probabilityOfDestroyingFriendlyBottomBase": "probabilityOfEnemyWinInBottomLane",
}

#: State-style namespaces expose the state attributes plus the win
#: probabilities of the same node (joined by parentStateId).
STATE_NAMESPACE_COLUMNS: tuple[str, ...] = STATE_COLUMNS + WINPROB_COLUMNS

RULE_CLASSES = ("staticState", "transition", "symmetryFlip", "symmetryReverse")

#: Legal namespaces per rule class.
CLASS_NAMESPACES: dict[str, tuple[str, ...]] = {
    "staticState": ("outputState", "winProb"),
    "transition": ("inputState", "outputState", "winProb", "action"),
    "symmetryFlip": (
        "inputState",
        "outputState",
        "winProb",
        "action",
        "outputStateForFlippedInputs",
    ),
    "symmetryReverse": (
        "inputState",
        "outputState",
        "winProb",
        "action",
        "outputStateForReversedInputs",
    ),
}

#: Attribute lists per namespace (canonical names only; aliases resolved
#: separately).
NAMESPACE_COLUMNS: dict[str, tuple[str, ...]] = {
    "inputState": STATE_NAMESPACE_COLUMNS,
    "outputState": STATE_NAMESPACE_COLUMNS,
    "outputStateForFlippedInputs": STATE_NAMESPACE_COLUMNS,
    "outputStateForReversedInputs": STATE_NAMESPACE_COLUMNS,
    "winProb": WINPROB_COLUMNS,
    "action": ACTION_COLUMNS,
}


def resolve_attribute(namespace: str, name: str) -> str | None:
    """Canonical column for ``namespace.name``, or None if unknown."""
    columns = NAMESPACE_COLUMNS.get(namespace)
    if columns is None:
        return None
    if name in columns:
        return name
    canonical = WINPROB_ALIASES.get(name)
    if canonical is not None and canonical in columns:
        return canonical
    return None


def catalog_dict() -> dict:
    """Schema catalog payload served to clients for autocomplete."""
    return {
        "schemaVersion": SCHEMA_VERSION,
        "ruleClasses": list(RULE_CLASSES),
        "classNamespaces": {c: list(ns) for c, ns in CLASS_NAMESPACES.items()},
        "namespaces": {ns: list(cols) for ns, cols in NAMESPACE_COLUMNS.items()},
        "aliases": dict(WINPROB_ALIASES),
    }
