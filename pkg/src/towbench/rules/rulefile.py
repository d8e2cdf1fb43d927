"""Rule files: one rule per block, with class, name, severity, description,
and expression text. The persisted analogue of an analyst's rule notebook.

Format:

    [rule]
    name = no-phantom-immortals
    class = staticState
    severity = sound
    description = units require production buildings
    expr = outputState.friendlyImmortalBldgsTop = 0 AND ...
"""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path

from .catalog import SchemaCatalog, default_catalog
from .parser import QueryRule, RuleError, parse_rule

SEVERITIES = ("sound", "suspicion", "unsound")


@dataclass(frozen=True)
class RuleDefinition:
    name: str
    rule_class: str
    severity: str
    description: str
    rule: QueryRule

    @property
    def expr_text(self) -> str:
        return self.rule.source_text


class RuleFileError(ValueError):
    pass


def parse_rule_file(
    text: str, catalog: SchemaCatalog | None = None
) -> list[RuleDefinition]:
    catalog = catalog or default_catalog()
    blocks: list[dict[str, str]] = []
    current: dict[str, str] | None = None
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        if line == "[rule]":
            current = {"_line": str(lineno)}
            blocks.append(current)
            continue
        if current is None:
            raise RuleFileError(f"line {lineno}: content before first [rule] block")
        if "=" not in line:
            raise RuleFileError(f"line {lineno}: expected 'key = value'")
        key, _, value = line.partition("=")
        current[key.strip()] = value.strip()

    definitions = []
    seen_names = set()
    for block in blocks:
        where = f"rule block at line {block['_line']}"
        for required in ("name", "class", "expr"):
            if required not in block:
                raise RuleFileError(f"{where}: missing '{required}'")
        name = block["name"]
        if name in seen_names:
            raise RuleFileError(f"{where}: duplicate rule name {name!r}")
        seen_names.add(name)
        severity = block.get("severity", "sound")
        if severity not in SEVERITIES:
            raise RuleFileError(
                f"{where}: severity must be one of {', '.join(SEVERITIES)}"
            )
        try:
            rule = parse_rule(block["class"], block["expr"], catalog)
        except RuleError as exc:
            raise RuleFileError(f"{where} ({name}): {exc}") from exc
        definitions.append(
            RuleDefinition(
                name=name,
                rule_class=block["class"],
                severity=severity,
                description=block.get("description", ""),
                rule=rule,
            )
        )
    return definitions


def load_rule_file(path: str | Path, catalog: SchemaCatalog | None = None):
    return parse_rule_file(Path(path).read_text(), catalog)


def format_rule_file(definitions: list[RuleDefinition]) -> str:
    chunks = []
    for d in definitions:
        lines = [
            "[rule]",
            f"name = {d.name}",
            f"class = {d.rule_class}",
            f"severity = {d.severity}",
        ]
        if d.description:
            lines.append(f"description = {d.description}")
        lines.append(f"expr = {d.expr_text}")
        chunks.append("\n".join(lines))
    return "\n\n".join(chunks) + "\n"
