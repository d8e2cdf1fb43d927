"""Query-rule DSL: parser, typed AST, pretty printer, catalog, rule files."""

from .ast import (
    Arith,
    Attr,
    BoolOp,
    Cmp,
    Neg,
    Node,
    Not,
    Num,
    Span,
    attributes,
    node_type,
    pretty,
)
from .catalog import SchemaCatalog, default_catalog
from .parser import (
    Diagnostic,
    QueryRule,
    RuleError,
    parse_rule,
    validate_against_catalog,
)
from .rulefile import (
    RuleDefinition,
    RuleFileError,
    SEVERITIES,
    format_rule_file,
    load_rule_file,
    parse_rule_file,
)

__all__ = [name for name in dir() if not name.startswith("_")]
