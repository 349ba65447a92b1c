"""Baseline opponents and the common agent interface.

``random_act`` picks uniformly from the legal set.  ``osla_act`` simulates
every legal action once through the forward model on a state copy and
returns the best-scoring successor: terminal win/tie/loss dominates at
+1/0/-1, non-terminal successors are scored by the game's progress
heuristic (strictly inside (-1, 1)), ties break uniformly at random.

Both are pure functions of (state, rng); a seeded run reproduces every
opponent move.  The OSLA simulation copies the live rng stream, so its
single sample of a stochastic action sees the outcome the real apply would
produce; this is the documented one-sample look-ahead budget.
"""

from __future__ import annotations

import numpy as np

from .core import (
    ConfigurationError,
    GameState,
    apply,
    copy_state,
    current_player,
    legal_actions,
    terminal_reward,
)
from .actions import masked_softmax
from .rng import Rng


def random_act(state: GameState, rng: Rng) -> int:
    acts = legal_actions(state)
    return acts[rng.randrange(len(acts))]


def osla_act(state: GameState, rng: Rng) -> int:
    me = current_player(state)
    acts = legal_actions(state)
    if len(acts) == 1:
        return acts[0]
    best_score = -2.0
    best: list[int] = []
    for a in acts:
        sim = copy_state(state)
        apply(sim, a)
        if sim.finished:
            score = terminal_reward(sim, me)
        else:
            score = sim.game.heuristic(sim, me)
        if score > best_score:
            best_score = score
            best = [a]
        elif score == best_score:
            best.append(a)
    return best[rng.randrange(len(best))]


class Agent:
    """Decision-maker from the learner-side (observation, mask) interface.

    Forward-model baselines also receive the engine state; ``needs_state``
    tells the runner whether that is required.
    """

    name = "agent"
    needs_state = False

    def act(self, obs, mask, rng: Rng, state: GameState | None = None) -> int:
        raise NotImplementedError


class RandomAgent(Agent):
    name = "random"

    def act(self, obs, mask, rng, state=None):
        if state is not None:
            return random_act(state, rng)
        on = np.flatnonzero(mask)
        return int(on[rng.randrange(len(on))])


class OslaAgent(Agent):
    name = "osla"
    needs_state = True

    def act(self, obs, mask, rng, state=None):
        if state is None:
            raise ConfigurationError("osla needs forward-model access")
        return osla_act(state, rng)


class PolicyAgent(Agent):
    """Samples from a trained policy network over the masked logits."""

    needs_state = False

    def __init__(self, net, name="ppo", greedy=False):
        self.net = net
        self.name = name
        self.greedy = greedy

    def act(self, obs, mask, rng, state=None):
        logits, _ = self.net.forward(obs[None, ...])
        probs = masked_softmax(logits[0], mask)
        if self.greedy:
            return int(np.argmax(probs))
        u = rng.random()
        return int(np.searchsorted(np.cumsum(probs), u, side="right").clip(0, len(probs) - 1))


def make_agent(spec: str) -> Agent:
    """Agent factory for CLI/config names: random, osla, ppo:<checkpoint>."""
    if spec == "random":
        return RandomAgent()
    if spec == "osla":
        return OslaAgent()
    if spec.startswith("ppo:"):
        from .nn import PolicyValueNet

        net, _meta = PolicyValueNet.load(spec[4:])
        return PolicyAgent(net, name=spec)
    raise ConfigurationError(
        f"unknown agent {spec!r}; expected random, osla or ppo:<checkpoint>")
