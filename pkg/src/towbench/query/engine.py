"""Query-rule evaluation over the tree store.

Static rules select over state rows; transition rules evaluate every
(input state, action pair, output state) path; symmetry rules join each
path to its materialized counterfactual twin. The expression compiles to a
closure tree with native short-circuit behavior and evaluates in a single
pass per row, in row-id order, so reports are deterministic down to match
ordering. A division by zero in a rule counts the row as an evaluation
error rather than a match or a silent skip.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from ..rules.ast import Arith, Attr, BoolOp, Cmp, Neg, Node, Not, Num
from ..rules.parser import QueryRule
from ..store.schema import STATE_COLUMNS, WINPROB_COLUMNS
from ..store.tables import StoreError, TreeStore

#: context tuple layout: (input row, action row, output row, counterfactual row)
_IN, _ACT, _OUT, _CF = 0, 1, 2, 3

_STATE_COL_INDEX = {name: i for i, name in enumerate(STATE_COLUMNS)}
_WINPROB_COL_INDEX = {name: i for i, name in enumerate(WINPROB_COLUMNS)}


@dataclass(frozen=True)
class Scope:
    """What to evaluate over: episodes (None = all) and an optional
    restriction of static rules to model-predicted rows."""

    episode_ids: tuple[str, ...] | None = None
    only_model_predicted: bool = False


@dataclass(frozen=True)
class MatchIds:
    output_state_id: int
    input_state_id: int | None = None
    action_id: int | None = None
    counterfactual_id: int | None = None

    def as_dict(self) -> dict:
        return {
            "outputStateId": self.output_state_id,
            "inputStateId": self.input_state_id,
            "actionId": self.action_id,
            "counterfactualId": self.counterfactual_id,
        }


@dataclass
class ViolationReport:
    rule_id: str
    rule_class: str
    severity: str
    episode_id: str
    per_decision_counts: dict[int, int]
    matches: list[MatchIds]
    evaluation_errors: int
    total_rows_scanned: int

    @property
    def total_matches(self) -> int:
        return len(self.matches)

    def histogram(self, decision_points: int) -> list[int]:
        return [self.per_decision_counts.get(d, 0) for d in range(decision_points)]

    def as_dict(self, match_limit: int | None = None) -> dict:
        matches = self.matches if match_limit is None else self.matches[:match_limit]
        return {
            "ruleId": self.rule_id,
            "ruleClass": self.rule_class,
            "severity": self.severity,
            "episodeId": self.episode_id,
            "totalMatches": self.total_matches,
            "perDecisionCounts": {str(k): v for k, v in
                                  sorted(self.per_decision_counts.items())},
            "evaluationErrors": self.evaluation_errors,
            "totalRowsScanned": self.total_rows_scanned,
            "matches": [m.as_dict() for m in matches],
        }


class _Columns:
    """Lazily-extracted plain-python column lists for one evaluation."""

    def __init__(self, store: TreeStore, transform: str | None):
        self._store = store
        self._transform = transform
        self._cache: dict[tuple[str, str], list] = {}

    def get(self, source: str, column: str) -> list:
        key = (source, column)
        got = self._cache.get(key)
        if got is None:
            got = self._extract(source, column)
            self._cache[key] = got
        return got

    def _extract(self, source: str, column: str) -> list:
        store = self._store
        if source == "state":
            return store.state_attrs.view()[:, _STATE_COL_INDEX[column]].tolist()
        if source == "winprob":
            return store.winprob.view()[:, _WINPROB_COL_INDEX[column]].tolist()
        if source == "action":
            from ..store.schema import ACTION_COLUMNS

            idx = ACTION_COLUMNS.index(column)
            return store.action_rows.view()[:, idx].tolist()
        if source == "cf_state":
            cf = store.counterfactuals[self._transform]
            return cf.state_attrs.view()[:, _STATE_COL_INDEX[column]].tolist()
        if source == "cf_winprob":
            cf = store.counterfactuals[self._transform]
            return cf.winprob.view()[:, _WINPROB_COL_INDEX[column]].tolist()
        raise KeyError(source)


def _attr_fetcher(attr: Attr, columns: _Columns):
    name = attr.canonical
    ns = attr.namespace
    if ns in ("outputStateForFlippedInputs", "outputStateForReversedInputs"):
        slot = _CF
        source = "cf_state" if name in _STATE_COL_INDEX else "cf_winprob"
    elif ns == "action":
        slot, source = _ACT, "action"
    elif ns == "inputState":
        slot = _IN
        source = "state" if name in _STATE_COL_INDEX else "winprob"
    else:  # outputState, winProb
        slot = _OUT
        source = "state" if name in _STATE_COL_INDEX else "winprob"
    col = columns.get(source, name)
    return lambda ctx: col[ctx[slot]]


def compile_rule(node: Node, columns: _Columns):
    """Compile an AST into a ctx -> bool closure with short-circuiting."""
    if isinstance(node, Num):
        value = int(node.value) if node.is_int else node.value
        return lambda ctx: value
    if isinstance(node, Attr):
        return _attr_fetcher(node, columns)
    if isinstance(node, Neg):
        operand = compile_rule(node.operand, columns)
        return lambda ctx: -operand(ctx)
    if isinstance(node, Not):
        operand = compile_rule(node.operand, columns)
        return lambda ctx: not operand(ctx)
    if isinstance(node, Arith):
        left = compile_rule(node.left, columns)
        right = compile_rule(node.right, columns)
        op = node.op
        if op == "+":
            return lambda ctx: left(ctx) + right(ctx)
        if op == "-":
            return lambda ctx: left(ctx) - right(ctx)
        if op == "*":
            return lambda ctx: left(ctx) * right(ctx)
        return lambda ctx: left(ctx) / right(ctx)
    if isinstance(node, Cmp):
        left = compile_rule(node.left, columns)
        right = compile_rule(node.right, columns)
        op = node.op
        if op == "<":
            return lambda ctx: left(ctx) < right(ctx)
        if op == "<=":
            return lambda ctx: left(ctx) <= right(ctx)
        if op == "=":
            return lambda ctx: left(ctx) == right(ctx)
        if op == "!=":
            return lambda ctx: left(ctx) != right(ctx)
        if op == ">":
            return lambda ctx: left(ctx) > right(ctx)
        return lambda ctx: left(ctx) >= right(ctx)
    if isinstance(node, BoolOp):
        left = compile_rule(node.left, columns)
        right = compile_rule(node.right, columns)
        if node.op == "AND":
            return lambda ctx: left(ctx) and right(ctx)
        return lambda ctx: left(ctx) or right(ctx)
    raise TypeError(f"cannot compile {node!r}")


def _scope_episodes(store: TreeStore, scope: Scope) -> list[str]:
    if scope.episode_ids is None:
        return store.episode_ids()
    for episode_id in scope.episode_ids:
        store.episode_index(episode_id)  # raises NotFoundError on unknowns
    return list(scope.episode_ids)


def evaluate_rule(
    rule: QueryRule,
    store: TreeStore,
    scope: Scope = Scope(),
    rule_id: str = "rule",
    severity: str = "sound",
) -> list[ViolationReport]:
    """Evaluate one rule over the scope; one report per episode."""
    if rule.rule_class == "staticState":
        return _evaluate_static(rule, store, scope, rule_id, severity)
    if rule.rule_class == "transition":
        return _evaluate_transition(rule, store, scope, rule_id, severity)
    return _evaluate_symmetry(rule, store, scope, rule_id, severity)


def evaluate_static(rule, store, scope=Scope(), rule_id="rule", severity="sound"):
    if rule.rule_class != "staticState":
        raise ValueError("evaluate_static requires a staticState rule")
    return _evaluate_static(rule, store, scope, rule_id, severity)


def evaluate_transition(rule, store, scope=Scope(), rule_id="rule", severity="sound"):
    if rule.rule_class != "transition":
        raise ValueError("evaluate_transition requires a transition rule")
    return _evaluate_transition(rule, store, scope, rule_id, severity)


def evaluate_symmetry(rule, store, scope=Scope(), rule_id="rule", severity="sound"):
    if rule.rule_class not in ("symmetryFlip", "symmetryReverse"):
        raise ValueError("evaluate_symmetry requires a symmetry rule")
    return _evaluate_symmetry(rule, store, scope, rule_id, severity)


def _evaluate_static(rule, store, scope, rule_id, severity):
    columns = _Columns(store, None)
    check = compile_rule(rule.expr, columns)
    ep_col = store.state_episode.view()
    decision_col = store.state_decision.view()
    predicted_col = store.state_model_predicted.view()
    reports = []
    for episode_id in _scope_episodes(store, scope):
        ep = store.episode_index(episode_id)
        mask = ep_col == ep
        if scope.only_model_predicted:
            mask = mask & (predicted_col == 1)
        rows = np.flatnonzero(mask)
        matches: list[MatchIds] = []
        counts: dict[int, int] = {}
        errors = 0
        for i in rows.tolist():
            ctx = (-1, -1, i, -1)
            try:
                hit = check(ctx)
            except ZeroDivisionError:
                errors += 1
                continue
            if hit:
                matches.append(MatchIds(output_state_id=i))
                d = int(decision_col[i])
                counts[d] = counts.get(d, 0) + 1
        reports.append(
            ViolationReport(rule_id, rule.rule_class, severity, episode_id,
                            counts, matches, errors, len(rows))
        )
    return reports


def _evaluate_transition(rule, store, scope, rule_id, severity):
    columns = _Columns(store, None)
    check = compile_rule(rule.expr, columns)
    reports = []
    tr_ep = store.trans_episode.view()
    tr_dec = store.trans_decision.view()
    tr_in = store.trans_input.view()
    tr_act = store.trans_action.view()
    tr_out = store.trans_output.view()
    for episode_id in _scope_episodes(store, scope):
        ep = store.episode_index(episode_id)
        rows = np.flatnonzero(tr_ep == ep)
        matches: list[MatchIds] = []
        counts: dict[int, int] = {}
        errors = 0
        for t in rows.tolist():
            ctx = (int(tr_in[t]), int(tr_act[t]), int(tr_out[t]), -1)
            try:
                hit = check(ctx)
            except ZeroDivisionError:
                errors += 1
                continue
            if hit:
                matches.append(
                    MatchIds(ctx[_OUT], input_state_id=ctx[_IN], action_id=ctx[_ACT])
                )
                d = int(tr_dec[t])
                counts[d] = counts.get(d, 0) + 1
        reports.append(
            ViolationReport(rule_id, rule.rule_class, severity, episode_id,
                            counts, matches, errors, len(rows))
        )
    return reports


def _evaluate_symmetry(rule, store, scope, rule_id, severity):
    transform = "flip" if rule.rule_class == "symmetryFlip" else "reverse"
    columns = _Columns(store, transform)
    check = compile_rule(rule.expr, columns)
    cf = store.counterfactuals[transform]
    reports = []
    tr_dec = store.trans_decision.view()
    tr_in = store.trans_input.view()
    tr_act = store.trans_action.view()
    tr_out = store.trans_output.view()
    tr_ep = store.trans_episode.view()
    cf_trans = cf.transition_rows.view()
    cf_rows = cf.cf_state_rows.view()
    for episode_id in _scope_episodes(store, scope):
        ep = store.episode_index(episode_id)
        if ep not in cf.episodes_done:
            raise StoreError(
                f"counterfactuals for transform {transform!r} are not "
                f"materialized for episode {episode_id}; materialize first"
            )
        pair_mask = tr_ep[cf_trans] == ep
        trans_idx = cf_trans[pair_mask]
        twin_rows = cf_rows[pair_mask]
        matches: list[MatchIds] = []
        counts: dict[int, int] = {}
        errors = 0
        for t, twin in zip(trans_idx.tolist(), twin_rows.tolist()):
            ctx = (int(tr_in[t]), int(tr_act[t]), int(tr_out[t]), twin)
            try:
                hit = check(ctx)
            except ZeroDivisionError:
                errors += 1
                continue
            if hit:
                matches.append(
                    MatchIds(
                        ctx[_OUT],
                        input_state_id=ctx[_IN],
                        action_id=ctx[_ACT],
                        counterfactual_id=twin,
                    )
                )
                d = int(tr_dec[t])
                counts[d] = counts.get(d, 0) + 1
        reports.append(
            ViolationReport(rule_id, rule.rule_class, severity, episode_id,
                            counts, matches, errors, len(trans_idx))
        )
    return reports
