"""Command-line entry point.

Subcommands:

* ``play``    agent-vs-agent matches -> per-episode CSV (+ replay logs)
* ``train``   masked PPO run -> metrics CSV + checkpoints + manifest
* ``eval``    checkpoint or baseline matchup -> summary JSON
* ``bench``   random-playout throughput -> learner steps/sec
* ``actions`` action atlas dump (leaf index -> human-readable string)
* ``observe`` vector + JSON observation dump for goldens
* ``replay``  re-execute recorded episodes and verify hashes
* ``bridge``  stdio JSON bridge exposing the env API to other languages
"""

from __future__ import annotations

import argparse
import dataclasses
import json
import sys
import time
from pathlib import Path

import numpy as np

from . import core
from .agents import make_agent
from .env import EnvConfig, EpisodeMetrics, TabletopEnv, evaluate
from .games import game_spec
from .ppo import PPOConfig, train
from .recording import (
    EpisodeCsv,
    MetricsCsv,
    ReplayMismatchError,
    SUMMARY_FORMAT,
    FORMAT_VERSION,
    load_json,
    record_episode,
    save_json,
    start_run,
    verify_replay,
)
from .rng import Rng, derive_seed


def _parse_seeds(text: str) -> list[int]:
    return [int(x) for x in text.split(",") if x != ""]


def _add_common(p: argparse.ArgumentParser, players_default=2):
    p.add_argument("--game", required=True, choices=core.supported_games())
    p.add_argument("--players", type=int, default=players_default)
    p.add_argument("--out", type=Path, default=None,
                   help="output root (default $TABLETOP_RL_OUT or ./runs)")


def cmd_play(args) -> int:
    agents = args.agents.split(",")
    if len(agents) != args.players:
        print(f"error: need {args.players} agents, got {len(agents)}",
              file=sys.stderr)
        return 2
    config = {
        "game": args.game, "players": args.players, "agents": agents,
        "episodes": args.episodes, "seed": args.seed,
        "rotate_seats": args.rotate_seats, "record": args.record,
    }
    run_dir, _ = start_run("play", config, args.out)
    cfg = EnvConfig(
        game_id=args.game, n_players=args.players,
        opponents=tuple(agents[1:]), seed=args.seed,
        rotate_seats=args.rotate_seats)
    env = TabletopEnv(cfg)
    reference = make_agent(agents[0])
    rng = Rng(derive_seed(args.seed, 0x1EA4))
    csv_out = EpisodeCsv(run_dir / "episodes.csv")
    replay_dir = run_dir / "replays"
    if args.record:
        replay_dir.mkdir(exist_ok=True)
    infos = []
    for episode in range(args.episodes):
        log, info = record_episode(env, reference, rng)
        csv_out.write(episode, info)
        infos.append(dict(info, episode=episode))
        if args.record:
            save_json(replay_dir / f"episode_{episode:05d}.json", log)
    csv_out.close()
    metrics = EpisodeMetrics.from_records(infos, fps=0.0, window=None)
    print(f"{args.game}: {args.episodes} episodes, reference agent "
          f"{agents[0]} win rate {metrics.win_rate:.3f} "
          f"(mean length {metrics.mean_length:.2f})")
    print(f"artifacts: {run_dir}")
    return 0


def cmd_train(args) -> int:
    seeds = _parse_seeds(args.seeds)
    ppo = PPOConfig(total_steps=args.steps, n_envs=args.envs,
                    learning_rate=args.lr)
    config = {
        "game": args.game, "players": args.players, "opponent": args.opponent,
        "steps": args.steps, "seeds": seeds, "ppo": ppo.to_dict(),
    }
    run_dir, _ = start_run("train", config, args.out)
    print(f"run dir: {run_dir}")
    for seed in seeds:
        metrics_csv = MetricsCsv(run_dir / f"metrics_seed{seed}.csv")
        t0 = time.perf_counter()

        def on_update(row, _csv=metrics_csv, _seed=seed):
            _csv.write(row)
            if args.verbose:
                print(f"  seed {_seed} step {row['step']}: "
                      f"win {row['win_rate']:.3f} fps {row['fps']:.0f}")

        def on_checkpoint(net, step, _seed=seed):
            net.save(run_dir / f"checkpoint_seed{_seed}_step{step}.npz",
                     extra={"game": args.game, "players": args.players,
                            "opponent": args.opponent, "seed": _seed,
                            "step": step})

        net, history, final = train(
            args.game, args.players, args.opponent, ppo, seed,
            on_update=on_update, on_checkpoint=on_checkpoint)
        metrics_csv.close()
        net.save(run_dir / f"checkpoint_seed{seed}_final.npz",
                 extra={"game": args.game, "players": args.players,
                        "opponent": args.opponent, "seed": seed,
                        "step": args.steps})
        elapsed = time.perf_counter() - t0
        if final:
            print(f"seed {seed}: win {final.win_rate:.3f} "
                  f"len {final.mean_length:.2f} fps {final.fps:.0f} "
                  f"({elapsed:.0f}s)")
    return 0


def cmd_eval(args) -> int:
    seeds = _parse_seeds(args.seeds)
    config = {
        "game": args.game, "players": args.players, "agent": args.agent,
        "opponent": args.opponent, "episodes": args.episodes, "seeds": seeds,
        "rotate_seats": args.rotate_seats,
    }
    run_dir, _ = start_run("eval", config, args.out)
    cfg = EnvConfig(
        game_id=args.game, n_players=args.players,
        opponents=(args.opponent,) * (args.players - 1),
        rotate_seats=args.rotate_seats)
    per_seed = []
    all_records = []
    for seed in seeds:
        metrics, records = evaluate(
            args.agent, dataclasses.replace(cfg, seed=seed),
            args.episodes, window=args.window)
        per_seed.append({"seed": seed, **metrics.to_dict()})
        csv_out = EpisodeCsv(run_dir / f"episodes_seed{seed}.csv")
        for i, rec in enumerate(records):
            csv_out.write(i, rec)
        csv_out.close()
        all_records.extend(records)
    combined = EpisodeMetrics.from_records(
        all_records, fps=float(np.mean([m["fps"] for m in per_seed])),
        window=args.window)
    summary = {
        "format": SUMMARY_FORMAT,
        "version": FORMAT_VERSION,
        "config": config,
        "metrics": combined.to_dict(),
        "per_seed": per_seed,
    }
    save_json(run_dir / "summary.json", summary)
    print(json.dumps(summary["metrics"], indent=2))
    print(f"artifacts: {run_dir}")
    return 0


def cmd_bench(args) -> int:
    cfg = EnvConfig(
        game_id=args.game, n_players=args.players,
        opponents=("random",) * (args.players - 1), seed=args.seed,
        auto_reset=True)
    env = TabletopEnv(cfg)
    rng = Rng(derive_seed(args.seed, 0xBE7C))
    result = env.reset()
    steps = 0
    deadline = time.perf_counter() + args.seconds
    while time.perf_counter() < deadline:
        for _ in range(256):
            mask = result.mask
            on = np.flatnonzero(mask)
            result = env.step(int(on[rng.randrange(len(on))]))
            steps += 1
    elapsed = args.seconds + (time.perf_counter() - deadline)
    doc = {
        "format": "tabletop-rl/bench",
        "version": FORMAT_VERSION,
        "game": args.game,
        "players": args.players,
        "seconds": round(elapsed, 3),
        "learner_steps": steps,
        "steps_per_sec": round(steps / elapsed, 1),
    }
    print(json.dumps(doc, indent=2))
    if args.out:
        run_dir, _ = start_run("bench", {k: doc[k] for k in
                                         ("game", "players", "seconds")},
                               args.out)
        save_json(run_dir / "bench.json", doc)
    return 0


def cmd_actions(args) -> int:
    tree = core.make_game(args.game, args.players).build_tree()
    if args.json:
        doc = {
            "game": args.game, "players": args.players,
            "leaf_count": tree.leaf_count,
            "categories": tree.categories(),
            "leaves": list(tree.leaves),
        }
        print(json.dumps(doc, indent=2))
    else:
        print(f"{args.game} ({args.players} players): "
              f"{tree.leaf_count} actions, categories: "
              f"{', '.join(tree.categories())}")
        for i, label in enumerate(tree.leaves):
            print(f"{i:5d}  {label}")
    return 0


def cmd_observe(args) -> int:
    state = core.reset(args.game, args.players, args.seed)
    rng = Rng(derive_seed(args.seed, 0x0B5))
    for _ in range(args.step):
        if state.finished:
            break
        acts = core.legal_actions(state)
        core.apply(state, acts[rng.randrange(len(acts))])
    player = args.player
    if player is None:
        player = 0 if state.finished else state.current_player
    doc = {
        "game": args.game,
        "players": args.players,
        "seed": args.seed,
        "steps_applied": state.turn_counter,
        "player": player,
        "finished": state.finished,
        "state_hash": core.state_hash(state),
        "vector": state.game.vectorize(state, player).tolist(),
        "json": state.game.to_json(state, player),
    }
    print(json.dumps(doc, indent=2))
    return 0


def cmd_replay(args) -> int:
    failures = 0
    for path in args.logs:
        try:
            info = verify_replay(load_json(path))
            print(f"ok {path} terminal={info['terminal_hash'][:16]} "
                  f"result={info['result']}")
        except (ReplayMismatchError, core.GameError, KeyError, OSError) as exc:
            failures += 1
            print(f"FAIL {path}: {exc}", file=sys.stderr)
    return 1 if failures else 0


def cmd_bridge(args) -> int:
    from .bridge import serve_stdio

    serve_stdio()
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="tabletop-rl",
        description="Tabletop game simulation engine with masked PPO baselines")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("play", help="agent-vs-agent matches")
    _add_common(p)
    p.add_argument("--agents", required=True,
                   help="comma list, one per seat; first is the reference")
    p.add_argument("--episodes", type=int, default=100)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--rotate-seats", action="store_true")
    p.add_argument("--record", action="store_true",
                   help="write one replay log per episode")
    p.set_defaults(func=cmd_play)

    p = sub.add_parser("train", help="masked PPO training")
    _add_common(p)
    p.add_argument("--opponent", default="random")
    p.add_argument("--steps", type=int, default=1_000_000)
    p.add_argument("--seeds", default="1", help="comma list of seeds")
    p.add_argument("--envs", type=int, default=8)
    p.add_argument("--lr", type=float, default=2.5e-4)
    p.add_argument("--verbose", action="store_true")
    p.set_defaults(func=cmd_train)

    p = sub.add_parser("eval", help="evaluate an agent matchup")
    _add_common(p)
    p.add_argument("--agent", required=True,
                   help="random | osla | ppo:<checkpoint.npz>")
    p.add_argument("--opponent", default="random")
    p.add_argument("--episodes", type=int, default=100)
    p.add_argument("--seeds", default="0")
    p.add_argument("--window", type=int, default=None)
    p.add_argument("--rotate-seats", action="store_true")
    p.set_defaults(func=cmd_eval)

    p = sub.add_parser("bench", help="random-playout throughput")
    _add_common(p)
    p.add_argument("--seconds", type=float, default=10.0)
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(func=cmd_bench)

    p = sub.add_parser("actions", help="dump the action atlas")
    _add_common(p)
    p.add_argument("--json", action="store_true")
    p.set_defaults(func=cmd_actions)

    p = sub.add_parser("observe", help="dump both observation encodings")
    _add_common(p)
    p.add_argument("--seed", type=int, required=True)
    p.add_argument("--step", type=int, default=0)
    p.add_argument("--player", type=int, default=None)
    p.set_defaults(func=cmd_observe)

    p = sub.add_parser("replay", help="verify recorded episodes")
    p.add_argument("logs", nargs="+", type=Path)
    p.set_defaults(func=cmd_replay)

    p = sub.add_parser("bridge", help="stdio JSON env bridge")
    p.set_defaults(func=cmd_bridge)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except core.GameError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
