"""Command-line entry points.

Every command is deterministic given its seeds and input files; artifacts
and reports are machine-readable files, with a human summary on stdout.
The ``query`` command exits nonzero when any sound-severity rule matched,
so rule suites can gate automation.
"""

from __future__ import annotations

import argparse
import csv
import json
import sys
from pathlib import Path

import numpy as np

from .game import GameConfig, default_config, load_config
from .harness import PlannerAgent, RandomAgent, play_match
from .models import (
    exact_bundle,
    flawed_bundle,
    learned_bundle,
    load_flaw_file,
    load_net,
    save_net,
)
from .planner import DEFAULT_WIDTHS
from .query import Scope, evaluate_rule
from .rules import load_rule_file
from .store import TreeStore, materialize_counterfactuals, write_episode
from .training import (
    AgentPool,
    DQNHyperparams,
    DynamicsHyperparams,
    collect_dynamics_dataset,
    load_records,
    run_pool_training,
    save_records,
    train_dynamics,
)


def _load_config(args) -> GameConfig:
    if getattr(args, "config", None):
        return load_config(args.config)
    return default_config()


def _parse_widths(text: str):
    parts = [int(p) for p in text.split(",")]
    if len(parts) != 4:
        raise argparse.ArgumentTypeError("widths must be four integers: rf,re,cf,ce")
    return ((parts[0], parts[1]), (parts[2], parts[3]))


def _build_bundle(args, config: GameConfig):
    kind = getattr(args, "bundle", "exact")
    if kind == "exact":
        bundle = exact_bundle(config)
    elif kind == "learned":
        if not getattr(args, "transition_weights", None) or not getattr(
            args, "q_weights", None
        ):
            raise SystemExit(
                "learned bundle requires --transition-weights and --q-weights"
            )
        tnet, _ = load_net(args.transition_weights)
        qnet, _ = load_net(args.q_weights)
        bundle = learned_bundle(tnet, qnet, config)
    else:
        raise SystemExit(f"unknown bundle kind {kind!r}")
    if getattr(args, "flaws", None):
        flaws, seed = load_flaw_file(args.flaws)
        bundle = flawed_bundle(bundle, flaws, seed)
    return bundle


def cmd_play(args) -> int:
    config = _load_config(args)
    bundle = _build_bundle(args, config)
    agent = PlannerAgent(bundle, widths=args.widths)
    opponent = RandomAgent()
    out_dir = Path(args.out)
    out_dir.mkdir(parents=True, exist_ok=True)
    win_rate, results = play_match(
        config, agent, opponent, args.games, args.seed, record_trees=True
    )
    paths = []
    for i, result in enumerate(results):
        path = out_dir / f"episode-s{args.seed}-g{i:03d}.jsonl"
        write_episode(path, result.trees, result.outcome, config.content_hash(),
                      bundle.describe(), seed=args.seed)
        paths.append(path)
    total_nodes = sum(t.node_count() for r in results for t in r.trees)
    print(f"played {args.games} game(s); friendly win rate {win_rate:.2f}")
    print(f"recorded {total_nodes} tree nodes into {len(paths)} artifact(s) "
          f"under {out_dir}")
    return 0


def cmd_train(args) -> int:
    config = _load_config(args)
    hp = DQNHyperparams()
    rng = np.random.default_rng(args.seed)
    pool, history = run_pool_training(config, args.rounds, args.episodes, hp, rng)
    out_dir = Path(args.out)
    pool.save(out_dir)
    with open(out_dir / "history.csv", "w", newline="") as fh:
        writer = csv.DictWriter(
            fh,
            fieldnames=[
                "round", "episode", "epsilon", "lossTopLane", "lossBottomLane",
                "lossEnemyTopLane", "lossEnemyBottomLane", "winRateVsPool",
            ],
        )
        writer.writeheader()
        for row in history:
            writer.writerow(row)
    final = pool.best()
    print(f"pool grew to {len(pool)} member(s); "
          f"last agent win rate vs pool: {final.win_rate}")
    print(f"pool saved to {out_dir}")
    return 0


def cmd_collect(args) -> int:
    config = _load_config(args)
    rng = np.random.default_rng(args.seed)
    if args.pool:
        pool = AgentPool.load(args.pool, config)
    else:
        pool = AgentPool(config)
    records = collect_dynamics_dataset(
        pool, args.episodes, args.random_fraction, config, rng
    )
    save_records(records, args.out)
    terminal = sum(1 for r in records if r.reward_vector.sum() > 0)
    print(f"collected {len(records)} transition(s) from {args.episodes} "
          f"episode(s) ({terminal} decisive)")
    return 0


def cmd_fit(args) -> int:
    records = load_records(args.dataset)
    hp = DynamicsHyperparams(epochs=args.epochs)
    net, report = train_dynamics(records, hp, np.random.default_rng(args.seed))
    save_net(net, args.out, meta={"role": "dynamics"})
    if args.report:
        Path(args.report).write_text(json.dumps(report, indent=2))
    print(f"trained dynamics model on {report['trainRecords']} record(s)")
    print(f"held-out health MAE {report['healthMAE']:.3f} "
          f"(no-change baseline {report['healthBaselineMAE']:.3f})")
    better = report["healthMAE"] < report["healthBaselineMAE"]
    print("model beats the no-change baseline" if better
          else "model does NOT beat the no-change baseline")
    return 0


def cmd_ingest(args) -> int:
    store = TreeStore.load_snapshot(args.store) if Path(args.store).exists() \
        else TreeStore()
    for path in args.episodes:
        episode_id, counts = store.ingest_episode(path)
        if counts.get("alreadyIngested"):
            print(f"{path}: already ingested as {episode_id}")
        else:
            print(f"{path}: episode {episode_id} "
                  f"({counts['states']} states, {counts['actions']} actions, "
                  f"{counts['transitions']} transitions)")
    store.save_snapshot(args.store)
    print(f"store now holds {len(store.episodes)} episode(s) -> {args.store}")
    return 0


def cmd_counterfactuals(args) -> int:
    config = _load_config(args)
    store = TreeStore.load_snapshot(args.store)
    bundle = _build_bundle(args, config)
    transforms = tuple(args.transforms.split(","))
    episode_ids = [args.episode] if args.episode else store.episode_ids()
    for episode_id in episode_ids:
        counts = materialize_counterfactuals(store, episode_id, bundle, transforms)
        print(f"{episode_id}: " + ", ".join(
            f"{t}={n}" for t, n in counts.items()))
    store.save_snapshot(args.store)
    return 0


def cmd_rules_check(args) -> int:
    try:
        definitions = load_rule_file(args.file)
    except Exception as exc:
        print(f"INVALID: {exc}", file=sys.stderr)
        return 1
    for d in definitions:
        print(f"ok  {d.rule_class:<16} {d.severity:<10} {d.name}")
    print(f"{len(definitions)} rule(s) valid")
    return 0


def cmd_query(args) -> int:
    store = TreeStore.load_snapshot(args.store)
    definitions = load_rule_file(args.rules)
    episode_ids = tuple([args.episode]) if args.episode else None
    scope = Scope(episode_ids, only_model_predicted=args.only_predicted)
    out_lines = []
    sound_hits = 0
    print(f"{'rule':<40} {'class':<16} {'episode':<18} {'matches':>8} {'errors':>7}")
    for d in definitions:
        reports = evaluate_rule(d.rule, store, scope, rule_id=d.name,
                                severity=d.severity)
        for report in reports:
            if d.severity == "sound":
                sound_hits += report.total_matches
            print(f"{d.name:<40} {d.rule_class:<16} {report.episode_id:<18} "
                  f"{report.total_matches:>8} {report.evaluation_errors:>7}")
            out_lines.append(json.dumps(report.as_dict(args.match_limit),
                                        separators=(",", ":")))
    if args.out:
        Path(args.out).write_text("\n".join(out_lines) + "\n")
        print(f"reports written to {args.out}")
    if sound_hits > 0:
        print(f"FAIL: {sound_hits} sound-rule violation(s)")
        return 1
    print("all sound rules clean")
    return 0


def cmd_serve(args) -> int:
    import uvicorn

    from .api import ApiSession, create_app

    config = _load_config(args)
    store = TreeStore.load_snapshot(args.store)
    bundle = _build_bundle(args, config)
    session = ApiSession(store=store, bundle=bundle, config=config)
    app = create_app(session, ui_dir=args.ui_dir)
    import os

    port = args.port or int(os.environ.get("TOWBENCH_PORT", "8330"))
    uvicorn.run(app, host=args.host, port=port, log_level="warning")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="tow",
        description="Play, record, and behavior-test a planning agent for "
        "the two-lane tug-of-war game.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def add_config(p):
        p.add_argument("--config", help="game config file (key = value)")

    def add_bundle(p):
        p.add_argument("--bundle", default="exact", choices=["exact", "learned"])
        p.add_argument("--flaws", help="flaw spec file to inject")
        p.add_argument("--transition-weights")
        p.add_argument("--q-weights")

    p = sub.add_parser("play", help="run seeded games, emit episode artifacts")
    add_config(p)
    add_bundle(p)
    p.add_argument("--games", type=int, default=1)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--widths", type=_parse_widths, default=DEFAULT_WIDTHS,
                   help="rf,re,cf,ce ranking widths (default 20,10,5,3)")
    p.add_argument("--out", required=True, help="output directory")
    p.set_defaults(func=cmd_play)

    p = sub.add_parser("train", help="pool self-play training")
    add_config(p)
    p.add_argument("--rounds", type=int, default=1)
    p.add_argument("--episodes", type=int, default=2000,
                   help="episode budget per round")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", required=True, help="pool output directory")
    p.set_defaults(func=cmd_train)

    p = sub.add_parser("collect", help="collect a dynamics dataset")
    add_config(p)
    p.add_argument("--episodes", type=int, default=500)
    p.add_argument("--random-fraction", type=float, default=0.5)
    p.add_argument("--pool", help="pool directory (omit for random-only)")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", required=True, help="records file (.jsonl)")
    p.set_defaults(func=cmd_collect)

    p = sub.add_parser("fit", help="train the dynamics model on a dataset")
    p.add_argument("--dataset", required=True)
    p.add_argument("--epochs", type=int, default=40)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", required=True, help="weights file (.npz)")
    p.add_argument("--report", help="validation report JSON path")
    p.set_defaults(func=cmd_fit)

    p = sub.add_parser("ingest", help="ingest episode artifacts into a store")
    p.add_argument("--store", required=True, help="store snapshot (.npz)")
    p.add_argument("episodes", nargs="+", help="episode artifact files")
    p.set_defaults(func=cmd_ingest)

    p = sub.add_parser("counterfactuals",
                       help="materialize flip/reverse counterfactual tables")
    add_config(p)
    add_bundle(p)
    p.add_argument("--store", required=True)
    p.add_argument("--episode", help="episode id (default: all)")
    p.add_argument("--transforms", default="flip,reverse")
    p.set_defaults(func=cmd_counterfactuals)

    p = sub.add_parser("rules", help="rule file utilities")
    rules_sub = p.add_subparsers(dest="rules_command", required=True)
    pc = rules_sub.add_parser("check", help="parse and validate a rule file")
    pc.add_argument("file")
    pc.set_defaults(func=cmd_rules_check)

    p = sub.add_parser("query", help="evaluate a rule file over the store")
    p.add_argument("--store", required=True)
    p.add_argument("--rules", required=True)
    p.add_argument("--episode", help="episode id (default: all)")
    p.add_argument("--only-predicted", action="store_true",
                   help="restrict static rules to model-predicted rows")
    p.add_argument("--out", help="report file (.jsonl)")
    p.add_argument("--match-limit", type=int, default=100,
                   help="matches kept per report record")
    p.set_defaults(func=cmd_query)

    p = sub.add_parser("serve", help="serve the HTTP API (and UI, if built)")
    add_config(p)
    add_bundle(p)
    p.add_argument("--store", required=True)
    p.add_argument("--host", default="127.0.0.1")
    p.add_argument("--port", type=int, default=None,
                   help="default: $TOWBENCH_PORT or 8330")
    p.add_argument("--ui-dir", default=None,
                   help="directory with the built web client")
    p.set_defaults(func=cmd_serve)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
