"""Run artifacts: manifests, replay logs, episode CSVs, summaries.

Every artifact-producing command writes a RunManifest before doing any
work; the run directory is content-addressed by the manifest hash so
multi-seed sweeps never collide.  A replay log captures one learner
episode (engine seed, opponents, the scripted action list, per-step
rewards/dones and the terminal state hash) and ``verify_replay`` re-executes
it, failing loudly on any divergence.  Formats are documented in
docs/formats.md and versioned.
"""

from __future__ import annotations

import csv
import hashlib
import json
import os
import time
from pathlib import Path

import numpy as np

from . import __version__
from .agents import Agent
from .core import GameError
from .env import EnvConfig, TabletopEnv
from .rng import Rng, derive_seed

MANIFEST_FORMAT = "tabletop-rl/manifest"
REPLAY_FORMAT = "tabletop-rl/replay"
SUMMARY_FORMAT = "tabletop-rl/summary"
FORMAT_VERSION = 1

EPISODE_CSV_FIELDS = ("episode", "result", "return", "length", "seat", "seed")
METRICS_CSV_FIELDS = (
    "step", "episodes", "win_rate", "mean_return", "mean_length", "fps",
    "lr", "env_errors", "loss", "policy_loss", "value_loss", "entropy",
    "clip_frac", "approx_kl", "ratio_max_abs_dev", "grad_norm",
)


class ReplayMismatchError(GameError):
    code = "replay_mismatch"


def out_root() -> Path:
    return Path(os.environ.get("TABLETOP_RL_OUT", "runs"))


def manifest_hash(manifest: dict) -> str:
    stable = {k: v for k, v in manifest.items() if k not in ("created_unix",)}
    blob = json.dumps(stable, sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(blob.encode()).hexdigest()[:12]


def start_run(command: str, config: dict, root: Path | None = None) -> tuple[Path, dict]:
    """Create the run directory and write the manifest before anything else."""
    manifest = {
        "format": MANIFEST_FORMAT,
        "version": FORMAT_VERSION,
        "command": command,
        "package_version": __version__,
        "config": config,
        "created_unix": int(time.time()),
    }
    run_dir = (root or out_root()) / f"{command}-{manifest_hash(manifest)}"
    run_dir.mkdir(parents=True, exist_ok=True)
    with open(run_dir / "manifest.json", "w") as fh:
        json.dump(manifest, fh, indent=2)
        fh.write("\n")
    return run_dir, manifest


class EpisodeCsv:
    def __init__(self, path: Path):
        self._fh = open(path, "w", newline="")
        self._writer = csv.DictWriter(self._fh, fieldnames=EPISODE_CSV_FIELDS)
        self._writer.writeheader()

    def write(self, index: int, info: dict) -> None:
        self._writer.writerow({
            "episode": index,
            "result": info["result"],
            "return": info["return"],
            "length": info["length"],
            "seat": info["seat"],
            "seed": info["seed"],
        })

    def close(self) -> None:
        self._fh.close()


class MetricsCsv:
    def __init__(self, path: Path):
        self._fh = open(path, "w", newline="")
        self._writer = csv.DictWriter(self._fh, fieldnames=METRICS_CSV_FIELDS,
                                      extrasaction="ignore")
        self._writer.writeheader()

    def write(self, row: dict) -> None:
        self._writer.writerow(row)
        self._fh.flush()

    def close(self) -> None:
        self._fh.close()


# -- replay logs -----------------------------------------------------------------

def record_episode(env: TabletopEnv, agent: Agent, rng: Rng,
                   episode_seed: int | None = None) -> tuple[dict, dict]:
    """Play one episode, returning (replay log, terminal info)."""
    result = env.reset(episode_seed=episode_seed)
    actions, rewards, dones = [], [], []
    while not result.done:
        action = agent.act(result.obs, result.mask, rng,
                           state=env.state if agent.needs_state else None)
        result = env.step(action)
        actions.append(int(action))
        rewards.append(float(result.reward))
        dones.append(bool(result.done))
    log = {
        "format": REPLAY_FORMAT,
        "version": FORMAT_VERSION,
        "game": env.cfg.game_id,
        "players": env.cfg.n_players,
        "seed": env.episode_seed,
        "learner_seat": env.learner_seat,
        "opponents": [getattr(a, "name", str(a)) for a in env._opponents],
        "actions": actions,
        "rewards": rewards,
        "dones": dones,
        "terminal_hash": result.info["terminal_hash"],
    }
    return log, result.info


def verify_replay(log: dict) -> dict:
    """Re-execute a replay log; raises ReplayMismatchError on divergence."""
    if log.get("format") != REPLAY_FORMAT or log.get("version") != FORMAT_VERSION:
        raise ReplayMismatchError(f"not a v{FORMAT_VERSION} replay log")
    cfg = EnvConfig(
        game_id=log["game"], n_players=log["players"],
        opponents=tuple(log["opponents"]), seed=log["seed"],
        learner_seat=log["learner_seat"])
    env = TabletopEnv(cfg)
    result = env.reset(episode_seed=log["seed"])
    rewards, dones = [], []
    for i, action in enumerate(log["actions"]):
        if result.done:
            raise ReplayMismatchError(f"episode ended early at step {i}")
        if not result.mask[action]:
            raise ReplayMismatchError(f"logged action {action} illegal at step {i}")
        result = env.step(action)
        rewards.append(float(result.reward))
        dones.append(bool(result.done))
    if not result.done:
        raise ReplayMismatchError("episode did not finish after logged actions")
    if rewards != [float(x) for x in log["rewards"]]:
        raise ReplayMismatchError("reward sequence diverged")
    if dones != [bool(x) for x in log["dones"]]:
        raise ReplayMismatchError("done sequence diverged")
    terminal = result.info["terminal_hash"]
    if terminal != log["terminal_hash"]:
        raise ReplayMismatchError(
            f"terminal hash {terminal} != logged {log['terminal_hash']}")
    return result.info


def save_json(path: Path, doc: dict) -> None:
    with open(path, "w") as fh:
        json.dump(doc, fh, indent=2, default=_json_default)
        fh.write("\n")


def load_json(path) -> dict:
    with open(path) as fh:
        return json.load(fh)


def _json_default(x):
    if isinstance(x, (np.integer,)):
        return int(x)
    if isinstance(x, (np.floating,)):
        return float(x)
    raise TypeError(f"not JSON serializable: {type(x)}")
