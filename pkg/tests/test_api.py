"""HTTP API tests against a real in-process session."""

from __future__ import annotations

import numpy as np
import pytest
from fastapi.testclient import TestClient

from towbench.api import ApiSession, create_app
from towbench.game import ENEMY, TOP, default_config
from towbench.models import exact_bundle, flawed_bundle, health_inflation
from towbench.query import Scope, evaluate_rule, tree_slice
from towbench.rules import parse_rule
from towbench.store import materialize_counterfactuals

from .test_dsl import EX_2_1, EX_3_2, MONOTONICITY
from .test_engine import SMALL, play_and_ingest


@pytest.fixture(scope="module")
def flawed_session():
    base = exact_bundle(SMALL)
    flawed = flawed_bundle(base, [health_inflation(TOP, ENEMY, 10, 0.4)], seed=21)
    store, ids = play_and_ingest(flawed, 2, seed=900, materialize_with=flawed)
    session = ApiSession(store=store, config=SMALL, bundle=flawed)
    return session, ids


@pytest.fixture(scope="module")
def client(flawed_session):
    session, _ = flawed_session
    return TestClient(create_app(session))


def test_schema_catalog(client):
    resp = client.get("/v1/schema")
    assert resp.status_code == 200
    body = resp.json()
    assert body["schemaVersion"] == 1
    catalog = body["catalog"]
    assert "outputState" in catalog["namespaces"]
    assert "friendlyHealthTop" in catalog["namespaces"]["outputState"]
    assert catalog["aliases"]["probabilityOfDestroyingEnemyTopBase"] == (
        "probabilityOfWinInTopLane"
    )


def test_list_episodes_and_decisions(client, flawed_session):
    _, ids = flawed_session
    resp = client.get("/v1/episodes")
    assert resp.status_code == 200
    episodes = resp.json()["episodes"]
    assert {e["episodeId"] for e in episodes} == set(ids)
    first = episodes[0]["episodeId"]
    detail = client.get(f"/v1/episodes/{first}")
    assert detail.status_code == 200
    assert detail.json()["transitionInferences"] > 0
    decisions = client.get(f"/v1/episodes/{first}/decisions")
    assert decisions.status_code == 200
    assert len(decisions.json()["decisions"]) >= 1


def test_unknown_episode_404(client):
    assert client.get("/v1/episodes/nope").status_code == 404


def test_post_verbatim_rule_accepted(client):
    resp = client.post("/v1/rules", json={"class": "transition",
                                          "text": MONOTONICITY})
    assert resp.status_code == 200
    body = resp.json()
    assert body["diagnostics"] == []
    assert body["ruleId"].startswith("r")


def test_post_invalid_rule_structured_diagnostics(client):
    resp = client.post(
        "/v1/rules",
        json={"class": "staticState",
              "text": "inputState.friendlyHealthTop > 0"},
    )
    assert resp.status_code == 400
    diag = resp.json()["diagnostics"][0]
    assert diag["kind"] == "namespace"
    assert diag["line"] == 1 and diag["col"] == 1


def test_evaluate_matches_engine_and_paginates(client, flawed_session):
    session, ids = flawed_session
    episode_id = ids[0]
    posted = client.post("/v1/rules", json={"class": "transition",
                                            "text": EX_2_1})
    rule_id = posted.json()["ruleId"]
    resp = client.post(
        "/v1/evaluate",
        json={"ruleId": rule_id, "episodeId": episode_id, "pageSize": 5},
    )
    assert resp.status_code == 200
    body = resp.json()
    rule = parse_rule("transition", EX_2_1)
    expected = evaluate_rule(rule, session.store, Scope((episode_id,)))[0]
    assert body["totalMatches"] == expected.total_matches
    decision_points = session.store.episodes[
        session.store.episode_index(episode_id)
    ].decision_count
    assert body["histogram"] == expected.histogram(decision_points)
    assert len(body["matches"]) == min(5, expected.total_matches)
    if expected.total_matches > 5:
        page2 = client.post(
            "/v1/evaluate",
            json={"ruleId": rule_id, "episodeId": episode_id,
                  "pageSize": 5, "page": 1},
        ).json()
        assert page2["matches"][0] == expected.matches[5].as_dict()


def test_evaluate_unknown_episode_404(client):
    posted = client.post("/v1/rules", json={"class": "transition",
                                            "text": EX_2_1})
    resp = client.post(
        "/v1/evaluate",
        json={"ruleId": posted.json()["ruleId"], "episodeId": "missing"},
    )
    assert resp.status_code == 404


def test_evaluate_symmetry_409_without_counterfactuals():
    bundle = exact_bundle(SMALL)
    store, ids = play_and_ingest(bundle, 1, seed=901)  # not materialized
    session = ApiSession(store=store, config=SMALL, bundle=bundle)
    local = TestClient(create_app(session))
    posted = local.post("/v1/rules", json={"class": "symmetryFlip",
                                           "text": EX_3_2})
    resp = local.post(
        "/v1/evaluate",
        json={"ruleId": posted.json()["ruleId"], "episodeId": ids[0]},
    )
    assert resp.status_code == 409
    assert "materialize" in resp.json()["error"]


def test_slice_endpoint_equals_engine_slice(client, flawed_session):
    session, ids = flawed_session
    episode_id = ids[0]
    posted = client.post("/v1/rules", json={"class": "transition",
                                            "text": EX_2_1})
    rule_id = posted.json()["ruleId"]
    body = client.post(
        "/v1/evaluate", json={"ruleId": rule_id, "episodeId": episode_id}
    ).json()
    decision = next(
        (int(d) for d, c in body["perDecisionCounts"].items() if c > 0), 0
    )
    resp = client.get(
        f"/v1/episodes/{episode_id}/decisions/{decision}/slice",
        params={"ruleId": rule_id},
    )
    assert resp.status_code == 200
    payload = resp.json()["slice"]
    rule = parse_rule("transition", EX_2_1)
    report = evaluate_rule(rule, session.store, Scope((episode_id,)))[0]
    expected = tree_slice(session.store, report, decision)
    assert payload == expected.as_dict()


def test_rule_registry_listing(client):
    posted = client.post(
        "/v1/rules",
        json={"class": "transition", "text": EX_2_1, "name": "hp-up",
              "severity": "suspicion"},
    )
    assert posted.status_code == 200
    rules = client.get("/v1/rules").json()["rules"]
    assert any(r["name"] == "hp-up" and r["severity"] == "suspicion"
               for r in rules)


def test_serve_static_ui_when_built(flawed_session, tmp_path):
    session, _ = flawed_session
    ui = tmp_path / "dist"
    ui.mkdir()
    (ui / "index.html").write_text("<!doctype html><title>workbench</title>")
    local = TestClient(create_app(session, ui_dir=str(ui)))
    # API routes keep priority over the static mount
    assert local.get("/v1/episodes").status_code == 200
    page = local.get("/")
    assert page.status_code == 200
    assert "workbench" in page.text


def test_validate_only_does_not_register(flawed_session):
    session, _ = flawed_session
    local = TestClient(create_app(session))
    before = len(session.rules)
    resp = local.post(
        "/v1/rules",
        json={"class": "transition", "text": MONOTONICITY,
              "validateOnly": True},
    )
    assert resp.status_code == 200
    assert resp.json()["ruleId"] is None
    assert resp.json()["diagnostics"] == []
    assert len(session.rules) == before
