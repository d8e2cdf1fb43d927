"""Query engine tests: hand-counted fixtures, flaw detection vs the
brute-force oracle, evaluation errors, determinism, and tree slices."""

from __future__ import annotations

from pathlib import Path

import numpy as np
import pytest

from towbench.game import (
    ENEMY,
    FRIENDLY,
    IMMORTAL,
    TOP,
    Outcome,
    default_config,
    initial_state,
)
from towbench.harness import PlannerAgent, RandomAgent, play_episode
from towbench.models import (
    asymmetry_noise,
    exact_bundle,
    flawed_bundle,
    health_inflation,
    phantom_units,
    win_prob_leak,
)
from towbench.planner import SearchTree, TreeNode, build_tree
from towbench.query import Scope, evaluate_rule, tree_slice
from towbench.rules import load_rule_file, parse_rule
from towbench.store import (
    StoreError,
    TreeStore,
    materialize_counterfactuals,
    write_episode,
)

from .oracle import oracle_report
from .test_dsl import EX_1_1, EX_1_2, EX_2_1, EX_2_2, EX_3_1, EX_3_2

RULESETS = Path(__file__).resolve().parent.parent / "rulesets"
SMALL = default_config(base_health=200, max_waves=6, deterministic=True)
WIDTHS = ((6, 4), (3, 2))


def play_and_ingest(bundle, games, seed, store=None, config=SMALL,
                    materialize_with=None):
    store = store or TreeStore()
    agent = PlannerAgent(bundle, widths=WIDTHS)
    ids = []
    root = np.random.SeedSequence(seed)
    for i, child in enumerate(root.spawn(games)):
        result = play_episode(config, agent, RandomAgent(),
                              np.random.default_rng(child), record_trees=True)
        import io
        import tempfile

        with tempfile.NamedTemporaryFile(suffix=".jsonl", delete=False) as fh:
            path = fh.name
        write_episode(path, result.trees, result.outcome, config.content_hash(),
                      bundle.describe(), seed=i)
        episode_id, _ = store.ingest_episode(path)
        ids.append(episode_id)
        if materialize_with is not None:
            materialize_counterfactuals(store, episode_id, materialize_with)
    return store, ids


@pytest.fixture(scope="module")
def exact_store():
    bundle = exact_bundle(SMALL)
    return play_and_ingest(bundle, 3, seed=100, materialize_with=bundle)


def assert_engine_equals_oracle(rule, store, episode_id, rule_id="r"):
    reports = evaluate_rule(rule, store, Scope((episode_id,)), rule_id)
    report = reports[0]
    count, per_decision, errors, rows = oracle_report(rule, store, episode_id)
    assert report.total_matches == count
    assert report.per_decision_counts == per_decision
    assert report.evaluation_errors == errors
    assert [m.output_state_id for m in report.matches] == rows
    assert sum(report.per_decision_counts.values()) == len(report.matches)
    return report


# ---------------------------------------------------------------------------
# Soundness on the exact backend
# ---------------------------------------------------------------------------


def test_sound_suite_clean_on_exact_episodes(exact_store):
    store, ids = exact_store
    suite = load_rule_file(RULESETS / "sound_suite.rules")
    for definition in suite:
        for episode_id in ids:
            report = assert_engine_equals_oracle(
                definition.rule, store, episode_id, definition.name
            )
            assert report.total_matches == 0, definition.name
            assert report.evaluation_errors == 0


# ---------------------------------------------------------------------------
# Hand-built store with a known violating row
# ---------------------------------------------------------------------------


def craft_episode(tmp_path, winprob_override=None, health_override=None):
    """A single decision point with a 1+1+1 path; overrides inject flaws."""
    cfg = default_config(
        deterministic=True, income_per_wave=0, starting_currency=0, max_waves=2
    )
    bundle = exact_bundle(cfg)
    tree = build_tree(bundle, initial_state(cfg))
    if winprob_override is not None:
        node_id, vec = winprob_override
        tree.nodes[node_id].win_probabilities = np.array(vec)
    if health_override is not None:
        node_id, player, lane, value = health_override
        tree.nodes[node_id].state.health[player, lane] = value
    outcome = Outcome(ENEMY, "timeoutLowestHealth", (0.0, 0.0, 0.0, 0.0))
    path = tmp_path / "crafted.jsonl"
    write_episode(path, [tree], outcome, cfg.content_hash(), "crafted")
    store = TreeStore()
    episode_id, _ = store.ingest_episode(path)
    return store, episode_id


def test_ex12_exactly_one_hand_built_violation(tmp_path):
    # Node 2 claims a friendly win probability although the friendly top
    # base is destroyed: exactly one row matches.
    store, episode_id = craft_episode(
        tmp_path,
        winprob_override=(2, [0.25, 0.0, 0.0, 0.0]),
        health_override=(2, FRIENDLY, TOP, 0),
    )
    rule = parse_rule("staticState", EX_1_2)
    report = assert_engine_equals_oracle(rule, store, episode_id)
    assert report.total_matches == 1
    assert report.matches[0].output_state_id == 2
    assert report.per_decision_counts == {0: 1}


def test_zero_violations_on_unmodified_crafted_episode(tmp_path):
    store, episode_id = craft_episode(tmp_path)
    rule = parse_rule("staticState", EX_1_2)
    assert assert_engine_equals_oracle(rule, store, episode_id).total_matches == 0


# ---------------------------------------------------------------------------
# Flaw families vs their corresponding rules
# ---------------------------------------------------------------------------


def test_health_inflation_detected_by_ex21():
    base = exact_bundle(SMALL)
    flawed = flawed_bundle(base, [health_inflation(TOP, ENEMY, 10, 0.3)], seed=7)
    store, ids = play_and_ingest(flawed, 2, seed=200)
    rule = parse_rule("transition", EX_2_1)
    total = 0
    for episode_id in ids:
        report = assert_engine_equals_oracle(rule, store, episode_id)
        total += report.total_matches
    assert total > 0


def test_phantom_units_detected_by_ex11():
    base = exact_bundle(SMALL)
    flawed = flawed_bundle(base, [phantom_units(IMMORTAL, 1)], seed=8)
    store, ids = play_and_ingest(flawed, 1, seed=300)
    rule = parse_rule("staticState", EX_1_1)
    # the flaw alternates lanes; check both lane variants of the rule
    bottom_variant = EX_1_1.replace("Top", "Bottom")
    total = 0
    for episode_id in ids:
        total += assert_engine_equals_oracle(rule, store, episode_id).total_matches
        rule_b = parse_rule("staticState", bottom_variant)
        total += assert_engine_equals_oracle(rule_b, store, episode_id).total_matches
    assert total > 0


def test_asymmetry_noise_detected_by_symmetry_rules():
    base = exact_bundle(SMALL)
    flawed = flawed_bundle(base, [asymmetry_noise(2.0)], seed=9)
    store, ids = play_and_ingest(flawed, 1, seed=400, materialize_with=flawed)
    flip_rule = parse_rule("symmetryFlip", EX_3_2)
    reverse_rule = parse_rule("symmetryReverse", EX_3_1)
    total = 0
    for episode_id in ids:
        total += assert_engine_equals_oracle(
            flip_rule, store, episode_id
        ).total_matches
        total += assert_engine_equals_oracle(
            reverse_rule, store, episode_id
        ).total_matches
    assert total > 0


def test_win_prob_leak_detected_by_ex12_variants():
    base = exact_bundle(SMALL)
    flawed = flawed_bundle(base, [win_prob_leak(0.05)], seed=10)
    store, ids = play_and_ingest(flawed, 3, seed=500)
    friendly_rule = parse_rule("staticState", EX_1_2)
    enemy_variant = (
        "outputState.enemyHealthTop = 0 AND "
        "(winProb.probabilityOfEnemyWinInTopLane + "
        "winProb.probabilityOfEnemyWinInBottomLane) != 0"
    )
    enemy_rule = parse_rule("staticState", enemy_variant)
    total = 0
    for episode_id in ids:
        total += assert_engine_equals_oracle(
            friendly_rule, store, episode_id
        ).total_matches
        total += assert_engine_equals_oracle(
            enemy_rule, store, episode_id
        ).total_matches
    assert total > 0


# ---------------------------------------------------------------------------
# Evaluation semantics
# ---------------------------------------------------------------------------


def test_division_by_zero_counts_as_evaluation_error(exact_store):
    store, ids = exact_store
    rule = parse_rule(
        "staticState",
        "outputState.friendlyHealthTop / outputState.friendlyMarineBldgsTop > 1",
    )
    report = assert_engine_equals_oracle(rule, store, ids[0])
    assert report.evaluation_errors > 0  # early rows have zero buildings
    assert report.evaluation_errors + report.total_matches <= report.total_rows_scanned


def test_short_circuit_avoids_division_error(exact_store):
    store, ids = exact_store
    guarded = parse_rule(
        "staticState",
        "outputState.friendlyMarineBldgsTop > 0 AND "
        "outputState.friendlyHealthTop / outputState.friendlyMarineBldgsTop > 1",
    )
    report = evaluate_rule(guarded, store, Scope((ids[0],)))[0]
    assert report.evaluation_errors == 0


def test_reports_deterministic_and_ordered(exact_store):
    store, ids = exact_store
    rule = parse_rule("staticState", "outputState.waveIndex >= 2")
    r1 = evaluate_rule(rule, store, Scope((ids[0],)))[0]
    r2 = evaluate_rule(rule, store, Scope((ids[0],)))[0]
    assert [m.output_state_id for m in r1.matches] == [
        m.output_state_id for m in r2.matches
    ]
    ids_list = [m.output_state_id for m in r1.matches]
    assert ids_list == sorted(ids_list)


def test_scope_widening_never_decreases_counts(exact_store):
    store, ids = exact_store
    rule = parse_rule("staticState", "outputState.waveIndex >= 1")
    narrow = evaluate_rule(rule, store, Scope((ids[0],)))
    wide = evaluate_rule(rule, store, Scope(tuple(ids)))
    assert sum(r.total_matches for r in wide) >= sum(
        r.total_matches for r in narrow
    )
    everything = evaluate_rule(rule, store, Scope())
    assert sum(r.total_matches for r in everything) == sum(
        r.total_matches for r in wide
    )


def test_only_model_predicted_scope(exact_store):
    store, ids = exact_store
    rule = parse_rule("staticState", "outputState.waveIndex >= 0")
    full = evaluate_rule(rule, store, Scope((ids[0],)))[0]
    predicted = evaluate_rule(
        rule, store, Scope((ids[0],), only_model_predicted=True)
    )[0]
    roots = store.episodes[store.episode_index(ids[0])].decision_count
    assert full.total_matches - predicted.total_matches == roots


def test_symmetry_requires_materialized_counterfactuals():
    bundle = exact_bundle(SMALL)
    store, ids = play_and_ingest(bundle, 1, seed=600)  # no materialization
    rule = parse_rule("symmetryFlip", EX_3_2)
    with pytest.raises(StoreError, match="materialize"):
        evaluate_rule(rule, store, Scope((ids[0],)))


def test_randomized_rules_match_oracle(exact_store):
    from .rulegen import random_rule_ast
    from towbench.rules.parser import QueryRule

    store, ids = exact_store
    rng = np.random.default_rng(777)
    checked = 0
    for _ in range(60):
        rule_class, node = random_rule_ast(rng)
        rule = QueryRule(rule_class, node, "<generated>")
        for episode_id in ids[:1]:
            assert_engine_equals_oracle(rule, store, episode_id)
            checked += 1
    assert checked == 60


# ---------------------------------------------------------------------------
# Tree slices
# ---------------------------------------------------------------------------


def test_slice_single_violation_path_plus_stubs(tmp_path):
    store, episode_id = craft_episode(
        tmp_path,
        winprob_override=(2, [0.25, 0.0, 0.0, 0.0]),
        health_override=(2, FRIENDLY, TOP, 0),
    )
    rule = parse_rule("staticState", EX_1_2)
    report = evaluate_rule(rule, store, Scope((episode_id,)))[0]
    fragment = tree_slice(store, report, 0)
    assert fragment.highlighted == [2]
    by_row = {n.state_row_id: n for n in fragment.nodes}
    assert by_row[0].expanded and by_row[1].expanded and by_row[2].expanded
    assert by_row[2].highlighted and not by_row[0].highlighted
    assert by_row[2].attributes is not None
    assert fragment.total_nodes == 3 and fragment.pruned_nodes == 0


def test_slice_zero_violation_decision_is_root_plus_stubs(exact_store):
    store, ids = exact_store
    rule = parse_rule("transition", EX_2_1)
    report = evaluate_rule(rule, store, Scope((ids[0],)))[0]
    assert report.total_matches == 0
    fragment = tree_slice(store, report, 0)
    root = next(n for n in fragment.nodes if n.depth == 0)
    assert root.expanded
    assert all(not n.expanded for n in fragment.nodes if n.depth > 0)
    assert all(not n.highlighted for n in fragment.nodes)
    assert all(n.depth <= 1 for n in fragment.nodes)
    assert fragment.pruned_nodes == fragment.total_nodes - len(fragment.nodes)


def test_slice_highlighted_nodes_satisfy_rule_individually():
    base = exact_bundle(SMALL)
    flawed = flawed_bundle(base, [health_inflation(TOP, ENEMY, 10, 0.5)], seed=11)
    store, ids = play_and_ingest(flawed, 1, seed=700)
    rule = parse_rule("transition", EX_2_1)
    report = evaluate_rule(rule, store, Scope((ids[0],)))[0]
    assert report.total_matches > 0
    decision = next(iter(report.per_decision_counts))
    fragment = tree_slice(store, report, decision)
    from .oracle import eval_node, _state_dict

    match_outputs = {m.output_state_id: m for m in report.matches}
    for row in fragment.highlighted:
        match = match_outputs[row]
        ctx = {
            "inputState": _state_dict(store, match.input_state_id),
            "outputState": _state_dict(store, row),
            "winProb": {},
            "action": {},
        }
        assert eval_node(rule.expr, ctx)
    # every highlighted node's ancestors are expanded in the fragment
    by_row = {n.state_row_id: n for n in fragment.nodes}
    for row in fragment.highlighted:
        node = by_row[row]
        while node.parent_state_row_id is not None:
            node = by_row[node.parent_state_row_id]
            assert node.expanded


def test_slice_unknown_decision_rejected(exact_store):
    store, ids = exact_store
    rule = parse_rule("transition", EX_2_1)
    report = evaluate_rule(rule, store, Scope((ids[0],)))[0]
    with pytest.raises(KeyError):
        tree_slice(store, report, 999)
