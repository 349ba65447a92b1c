"""Stdio JSON bridge: the cross-language surface of the environment API.

One request per line on stdin, one JSON response per line on stdout
(newline-delimited JSON, protocol version 1).  Host processes (the shipped
TypeScript client, or anything else that can spawn a subprocess) drive
``make_env`` / ``reset`` / ``step`` / ``close`` and receive observations and
masks as base64-encoded little-endian buffers (float32 and uint8) ready to
view as typed arrays without re-parsing; ``mode: "lean"`` omits them for
replay-style drivers that only need rewards, dones and hashes.

Every error carries a stable ``code`` (configuration, illegal_action,
lifecycle, usage, ...); an illegal action leaves the env state untouched.
The full wire format lives in docs/bridge.md.
"""

from __future__ import annotations

import base64
import json
import os
import sys

import numpy as np

from . import __version__, core
from .env import EnvConfig, TabletopEnv

PROTOCOL_VERSION = 1


def _rss_bytes() -> int:
    try:
        with open("/proc/self/statm") as fh:
            return int(fh.read().split()[1]) * os.sysconf("SC_PAGESIZE")
    except (OSError, ValueError, IndexError):
        return -1


def _b64(arr: np.ndarray) -> str:
    return base64.b64encode(np.ascontiguousarray(arr).tobytes()).decode()


class BridgeServer:
    """Protocol state machine; transport-agnostic (see serve_stdio)."""

    def __init__(self):
        self._envs: dict[int, TabletopEnv] = {}
        self._modes: dict[int, str] = {}
        self._next_id = 0
        self.shutdown = False

    # -- op handlers --------------------------------------------------------
    def op_hello(self, req):
        return {
            "name": "tabletop-rl",
            "version": __version__,
            "protocol": PROTOCOL_VERSION,
            "games": core.supported_games(),
        }

    def op_spec(self, req):
        game = core.make_game(req["game"], int(req.get("players", 2)))
        return {
            "action_count": game.build_tree().leaf_count,
            "obs_shape": list(game.observation_shape()),
        }

    def op_make_env(self, req):
        players = int(req.get("players", 2))
        if "opponents" in req:
            opponents = tuple(req["opponents"])
        else:
            opponents = (req.get("opponent", "random"),) * (players - 1)
        cfg = EnvConfig(
            game_id=req["game"],
            n_players=players,
            opponents=opponents,
            seed=int(req.get("seed", 0)),
            learner_seat=int(req.get("learner_seat", 0)),
            rotate_seats=bool(req.get("rotate_seats", False)),
        )
        env = TabletopEnv(cfg)
        env_id = self._next_id
        self._next_id += 1
        self._envs[env_id] = env
        self._modes[env_id] = req.get("mode", "full")
        return {
            "env": env_id,
            "action_count": env.action_count,
            "obs_shape": list(env.observation_shape),
        }

    def _env(self, req) -> tuple[int, TabletopEnv]:
        env_id = int(req["env"])
        env = self._envs.get(env_id)
        if env is None:
            raise core.GameError(f"env {env_id} is closed or unknown")
        return env_id, env

    def _payload(self, env_id, env, result) -> dict:
        doc = {"reward": result.reward, "done": result.done, "info": result.info}
        if self._modes[env_id] != "lean":
            doc["obs"] = _b64(result.obs)
            doc["mask"] = _b64(result.mask.astype(np.uint8))
        return doc

    def op_reset(self, req):
        env_id, env = self._env(req)
        seed = req.get("episode_seed")
        result = env.reset(episode_seed=None if seed is None else int(seed))
        return self._payload(env_id, env, result)

    def op_step(self, req):
        env_id, env = self._env(req)
        result = env.step(int(req["action"]))
        return self._payload(env_id, env, result)

    def op_observe(self, req):
        env_id, env = self._env(req)
        if env.state is None:
            raise core.GameError("env has not been reset")
        return {
            "obs": _b64(env._obs()),
            "mask": _b64(env._mask().astype(np.uint8)) if not env.state.finished
            else _b64(np.zeros(env.action_count, dtype=np.uint8)),
        }

    def op_state_hash(self, req):
        _, env = self._env(req)
        if env.state is None:
            raise core.GameError("env has not been reset")
        return {"hash": core.state_hash(env.state)}

    def op_close(self, req):
        env_id, _ = self._env(req)
        del self._envs[env_id]
        del self._modes[env_id]
        return {}

    def op_stats(self, req):
        return {"envs": len(self._envs), "rss_bytes": _rss_bytes()}

    def op_shutdown(self, req):
        self.shutdown = True
        return {}

    # -- dispatch -----------------------------------------------------------
    def handle(self, line: str) -> dict:
        try:
            req = json.loads(line)
        except json.JSONDecodeError as exc:
            return {"id": None, "ok": False, "code": "usage",
                    "message": f"bad json: {exc}"}
        req_id = req.get("id")
        handler = getattr(self, f"op_{req.get('op', '')}", None)
        if handler is None:
            return {"id": req_id, "ok": False, "code": "usage",
                    "message": f"unknown op {req.get('op')!r}"}
        try:
            body = handler(req)
        except core.IllegalActionError as exc:
            return {"id": req_id, "ok": False, "code": exc.code,
                    "message": str(exc), "action": exc.action,
                    "legal": exc.legal}
        except core.GameError as exc:
            return {"id": req_id, "ok": False,
                    "code": getattr(exc, "code", "game_error"),
                    "message": str(exc)}
        except (KeyError, TypeError, ValueError) as exc:
            return {"id": req_id, "ok": False, "code": "usage",
                    "message": f"{type(exc).__name__}: {exc}"}
        return {"id": req_id, "ok": True, **body}


def serve_stdio() -> None:
    server = BridgeServer()
    out = sys.stdout
    for line in sys.stdin:
        line = line.strip()
        if not line:
            continue
        response = server.handle(line)
        out.write(json.dumps(response, separators=(",", ":")))
        out.write("\n")
        out.flush()
        if server.shutdown:
            break
