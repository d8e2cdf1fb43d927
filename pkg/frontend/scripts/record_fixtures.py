"""Record real API payloads as fixtures for the web client's tests.

Plays a flaw-injected episode, serves it through the in-process API, and
dumps the exact JSON bodies the client would receive. Deterministic given
the seeds, so the fixtures are stable.
"""

from __future__ import annotations

import json
import sys
import tempfile
from pathlib import Path

import numpy as np
from fastapi.testclient import TestClient

from towbench.api import ApiSession, create_app
from towbench.game import ENEMY, TOP, default_config
from towbench.harness import PlannerAgent, RandomAgent, play_episode
from towbench.models import exact_bundle, flawed_bundle, health_inflation
from towbench.store import TreeStore, materialize_counterfactuals, write_episode

FIXTURES = Path(__file__).resolve().parent.parent / "tests" / "fixtures"
RULE_TEXT = "outputState.enemyHealthTop - inputState.enemyHealthTop > 5.0"


def main() -> int:
    config = default_config(base_health=200, max_waves=6, deterministic=True)
    base = exact_bundle(config)
    bundle = flawed_bundle(base, [health_inflation(TOP, ENEMY, 10, 0.4)], seed=21)
    agent = PlannerAgent(bundle, widths=((6, 4), (3, 2)))

    store = TreeStore()
    episode_ids = []
    for i, child in enumerate(np.random.SeedSequence(4200).spawn(2)):
        result = play_episode(config, agent, RandomAgent(),
                              np.random.default_rng(child), record_trees=True)
        with tempfile.NamedTemporaryFile(suffix=".jsonl", delete=False) as fh:
            path = fh.name
        write_episode(path, result.trees, result.outcome, config.content_hash(),
                      bundle.describe(), seed=i)
        episode_id, _ = store.ingest_episode(path)
        materialize_counterfactuals(store, episode_id, bundle)
        episode_ids.append(episode_id)

    session = ApiSession(store=store, config=config, bundle=bundle)
    client = TestClient(create_app(session))
    FIXTURES.mkdir(parents=True, exist_ok=True)

    def dump(name: str, payload) -> None:
        (FIXTURES / name).write_text(json.dumps(payload, indent=1, sort_keys=True))

    dump("schema.json", client.get("/v1/schema").json())
    dump("episodes.json", client.get("/v1/episodes").json())

    validated = client.post(
        "/v1/rules",
        json={"class": "transition", "text": RULE_TEXT, "validateOnly": True},
    )
    dump("rule_validate_ok.json", validated.json())

    invalid = client.post(
        "/v1/rules",
        json={"class": "staticState",
              "text": "inputState.friendlyHealthTop > 0", "validateOnly": True},
    )
    assert invalid.status_code == 400
    dump("rule_validate_invalid.json", invalid.json())

    registered = client.post(
        "/v1/rules",
        json={"class": "transition", "text": RULE_TEXT, "name": "hp-inflation"},
    )
    rule_id = registered.json()["ruleId"]
    dump("rule_register.json", registered.json())

    episode_id = episode_ids[0]
    evaluation = client.post(
        "/v1/evaluate",
        json={"ruleId": rule_id, "episodeId": episode_id, "pageSize": 500},
    ).json()
    assert evaluation["totalMatches"] > 0, "fixture episode must contain matches"
    dump("evaluate.json", evaluation)

    histogram = evaluation["histogram"]
    match_decision = max(range(len(histogram)), key=lambda d: histogram[d])
    zero_decisions = [d for d, c in enumerate(histogram) if c == 0]
    slices = {}
    for d in {match_decision, *(zero_decisions[:1])}:
        body = client.get(
            f"/v1/episodes/{episode_id}/decisions/{d}/slice",
            params={"ruleId": rule_id},
        ).json()
        slices[d] = body
        dump(f"slice_{d}.json", body)

    dump(
        "meta.json",
        {
            "episodeId": episode_id,
            "ruleId": rule_id,
            "ruleText": RULE_TEXT,
            "ruleClass": "transition",
            "matchDecision": match_decision,
            "zeroDecision": zero_decisions[0] if zero_decisions else None,
            "histogram": histogram,
        },
    )
    print(f"fixtures written to {FIXTURES}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
