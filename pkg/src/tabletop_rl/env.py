"""Reset/step environment loop from the learner's perspective.

Opponent agents act inside ``step``: after the learner's action is applied,
opponents (including reactive interrupts) play until it is the learner's
turn again or the game ends, so one ``env_step`` is exactly one learner
decision.  If the learner can never act again (eliminated mid-game in a
4-player match) the episode is played out to its natural end and the
learner's terminal reward is returned.

``VecEnv`` runs N independent environments with synchronous steps and
auto-reset: a finishing env's result carries the terminal info together
with the first observation of the next episode.  Per-env seeds derive from
the base seed and the env index, so a trajectory does not depend on how
many siblings run beside it.
"""

from __future__ import annotations

import dataclasses
import time
from dataclasses import dataclass, field

import numpy as np

from . import core
from .actions import compute_mask
from .agents import Agent, make_agent
from .core import ConfigurationError, GameError
from .observe import vectorize
from .rng import Rng, derive_seed


class LifecycleError(GameError):
    code = "lifecycle"


@dataclass(frozen=True)
class EnvConfig:
    game_id: str
    n_players: int = 2
    opponents: tuple = ("random",)
    seed: int = 0
    learner_seat: int = 0
    rotate_seats: bool = False
    auto_reset: bool = False

    def __post_init__(self):
        if len(self.opponents) != self.n_players - 1:
            raise ConfigurationError(
                f"need {self.n_players - 1} opponents, got {len(self.opponents)}")
        if not (0 <= self.learner_seat < self.n_players):
            raise ConfigurationError("learner seat out of range")


@dataclass
class StepResult:
    obs: np.ndarray
    mask: np.ndarray
    reward: float
    done: bool
    info: dict = field(default_factory=dict)


class TabletopEnv:
    """One learner-perspective environment instance."""

    def __init__(self, cfg: EnvConfig):
        self.cfg = cfg
        self.game = core.make_game(cfg.game_id, cfg.n_players)
        self.tree = self.game.build_tree()
        self.action_count = self.tree.leaf_count
        self.observation_shape = self.game.observation_shape()
        self._opponents = [
            op if isinstance(op, Agent) else make_agent(op) for op in cfg.opponents
        ]
        self.episode_index = -1
        self.state = None
        self.learner_seat = cfg.learner_seat
        self.episode_steps = 0
        self.total_learner_steps = 0
        self._done = True

    # -- episode control ------------------------------------------------------
    def reset(self, episode_seed: int | None = None) -> StepResult:
        self.episode_index += 1
        self.episode_seed = (derive_seed(self.cfg.seed, self.episode_index)
                             if episode_seed is None else episode_seed)
        if self.cfg.rotate_seats:
            self.learner_seat = (
                self.cfg.learner_seat + self.episode_index) % self.cfg.n_players
        self.state = core.reset(
            self.cfg.game_id, self.cfg.n_players, self.episode_seed)
        seats = [q for q in range(self.cfg.n_players) if q != self.learner_seat]
        self._agent_by_seat = dict(zip(seats, self._opponents))
        self._agent_rng = {
            seat: Rng(derive_seed(self.episode_seed, 0xA6E27, seat))
            for seat in seats
        }
        self.episode_steps = 0
        self._done = False
        self._run_opponents()
        if self.state.finished:  # cannot happen in the shipped games
            raise GameError(f"{self.cfg.game_id}: game ended before any "
                            "learner decision")
        return StepResult(self._obs(), self._mask(), 0.0, False, {})

    def step(self, action: int) -> StepResult:
        if self._done:
            if not self.cfg.auto_reset:
                raise LifecycleError("episode is done; call reset()")
            return self.reset()
        core.apply(self.state, int(action))
        self.episode_steps += 1
        self.total_learner_steps += 1
        self._run_opponents()
        if self.state.finished:
            reward = core.terminal_reward(self.state, self.learner_seat)
            info = {
                "result": {1.0: "win", 0.0: "tie", -1.0: "loss"}[reward],
                "length": self.episode_steps,
                "return": reward,
                "seat": self.learner_seat,
                "seed": self.episode_seed,
                "terminal_hash": core.state_hash(self.state),
            }
            self._done = True
            if self.cfg.auto_reset:
                fresh = self.reset()
                return StepResult(fresh.obs, fresh.mask, reward, True, info)
            zero_mask = np.zeros(self.action_count, dtype=bool)
            return StepResult(self._obs(), zero_mask, reward, True, info)
        return StepResult(self._obs(), self._mask(), 0.0, False, {})

    # -- internals -------------------------------------------------------------
    def _run_opponents(self) -> None:
        state = self.state
        while not state.finished and state.current_player != self.learner_seat:
            seat = state.current_player
            agent = self._agent_by_seat[seat]
            rng = self._agent_rng[seat]
            if getattr(agent, "net", None) is not None:
                action = agent.act(
                    vectorize(state, seat), compute_mask(self.tree, state), rng)
            else:
                action = agent.act(None, None, rng, state=state)
            core.apply(state, action)

    def _obs(self) -> np.ndarray:
        return vectorize(self.state, self.learner_seat)

    def _mask(self) -> np.ndarray:
        return compute_mask(self.tree, self.state)


class VecEnv:
    """N synchronous environments; finished slots auto-reset."""

    def __init__(self, cfg: EnvConfig, n_envs: int):
        if n_envs < 1:
            raise ConfigurationError("n_envs must be >= 1")
        self.cfg = cfg
        self.n_envs = n_envs
        self.envs = [
            TabletopEnv(dataclasses.replace(
                cfg, seed=derive_seed(cfg.seed, i), auto_reset=True))
            for i in range(n_envs)
        ]
        self.action_count = self.envs[0].action_count
        self.observation_shape = self.envs[0].observation_shape

    def reset(self) -> list[StepResult]:
        return [env.reset() for env in self.envs]

    def step(self, actions) -> list[StepResult]:
        results = []
        for env, action in zip(self.envs, actions):
            try:
                results.append(env.step(action))
            except GameError as exc:
                # report in-slot; restart the env so siblings keep running
                fresh = env.reset()
                results.append(StepResult(
                    fresh.obs, fresh.mask, 0.0, True,
                    {"error": f"{type(exc).__name__}: {exc}"}))
        return results


@dataclass
class EpisodeMetrics:
    """Mean and standard error over a trailing window of episodes."""

    episodes: int
    window: int
    win_rate: float
    win_rate_se: float
    mean_return: float
    return_se: float
    mean_length: float
    length_se: float
    fps: float

    @classmethod
    def from_records(cls, records: list[dict], fps: float, window: int | None = 100):
        if not records:
            raise ValueError("no episodes recorded")
        window = len(records) if window is None else min(window, len(records))
        tail = records[-window:]

        def mean_se(xs):
            arr = np.asarray(xs, dtype=np.float64)
            se = arr.std(ddof=1) / np.sqrt(len(arr)) if len(arr) > 1 else 0.0
            return float(arr.mean()), float(se)

        win, win_se = mean_se([1.0 if r["result"] == "win" else 0.0 for r in tail])
        ret, ret_se = mean_se([r["return"] for r in tail])
        length, length_se = mean_se([r["length"] for r in tail])
        return cls(
            episodes=len(records), window=window, win_rate=win,
            win_rate_se=win_se, mean_return=ret, return_se=ret_se,
            mean_length=length, length_se=length_se, fps=fps)

    def to_dict(self) -> dict:
        return dataclasses.asdict(self)


def evaluate(learner: Agent | str, cfg: EnvConfig, episodes: int,
             seeds=None, window: int | None = None):
    """Play matchups without learning; Table-I style metrics plus records."""
    if episodes < 1:
        raise ConfigurationError("episodes must be >= 1")
    agent = learner if isinstance(learner, Agent) else make_agent(learner)
    seeds = [cfg.seed] if not seeds else list(seeds)
    records = []
    steps = 0
    started = time.perf_counter()
    for seed in seeds:
        env = TabletopEnv(dataclasses.replace(cfg, seed=seed, auto_reset=False))
        rng = Rng(derive_seed(seed, 0x1EA4))
        for _ in range(episodes):
            result = env.reset()
            while not result.done:
                action = agent.act(
                    result.obs, result.mask, rng,
                    state=env.state if agent.needs_state else None)
                result = env.step(action)
                steps += 1
            records.append(dict(result.info, episode=len(records)))
    elapsed = max(time.perf_counter() - started, 1e-9)
    metrics = EpisodeMetrics.from_records(records, fps=steps / elapsed,
                                          window=window)
    return metrics, records
