"""Schema catalog: attribute lists per namespace plus the alias table.

The catalog is what drives name resolution in the parser and autocomplete
in clients. Aliases map one-to-one onto canonical columns.
"""

from __future__ import annotations

import difflib
from dataclasses import dataclass, field

from ..store.schema import (
    NAMESPACE_COLUMNS,
    WINPROB_ALIASES,
    catalog_dict,
)


@dataclass(frozen=True)
class SchemaCatalog:
    namespaces: dict[str, tuple[str, ...]]
    aliases: dict[str, str] = field(default_factory=dict)

    def resolve(self, namespace: str, name: str) -> str | None:
        columns = self.namespaces.get(namespace)
        if columns is None:
            return None
        if name in columns:
            return name
        canonical = self.aliases.get(name)
        if canonical is not None and canonical in columns:
            return canonical
        return None

    def suggest(self, namespace: str, name: str) -> str | None:
        """Nearest attribute name for an unknown reference."""
        columns = self.namespaces.get(namespace, ())
        pool = list(columns) + [a for a in self.aliases if self.aliases[a] in columns]
        matches = difflib.get_close_matches(name, pool, n=1, cutoff=0.5)
        return matches[0] if matches else None

    def complete(self, namespace: str, prefix: str) -> list[str]:
        """Attributes starting with ``prefix``, canonical names first."""
        columns = self.namespaces.get(namespace, ())
        hits = [c for c in columns if c.startswith(prefix)]
        hits += [
            a
            for a in self.aliases
            if a.startswith(prefix) and self.aliases[a] in columns
        ]
        return hits

    def as_dict(self) -> dict:
        return catalog_dict()


_DEFAULT: SchemaCatalog | None = None


def default_catalog() -> SchemaCatalog:
    global _DEFAULT
    if _DEFAULT is None:
        _DEFAULT = SchemaCatalog(
            namespaces=dict(NAMESPACE_COLUMNS), aliases=dict(WINPROB_ALIASES)
        )
    return _DEFAULT
