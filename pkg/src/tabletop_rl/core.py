"""Game-agnostic state and forward-model layer.

Every game implements the :class:`Game` interface: a stateless rules object
that creates, advances and inspects :class:`GameState` instances.  The free
functions at the bottom (``reset``, ``legal_actions``, ``apply``, ...) are
the engine's public forward-model API; they dispatch to the rules object a
state carries.

``apply`` mutates the given state in place and returns it.  Branching
(look-ahead, search) goes through ``copy_state`` first; a state is owned by
exactly one logical thread at a time.
"""

from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass, field
from enum import IntEnum
from typing import Sequence

from .rng import Rng


class GameError(Exception):
    """Base class for engine errors; ``code`` is stable across the bridge."""

    code = "game_error"


class ConfigurationError(GameError):
    code = "configuration"


class TerminalStateError(GameError):
    code = "terminal_state"


class IllegalActionError(GameError):
    code = "illegal_action"

    def __init__(self, action: int, legal: Sequence[int], message: str = ""):
        self.action = action
        self.legal = list(legal)
        super().__init__(
            message or f"action {action} is illegal; legal actions: {self.legal}"
        )


class ShapeError(GameError, ValueError):
    code = "shape"


class InvalidMaskError(GameError, ValueError):
    code = "invalid_mask"


class Result(IntEnum):
    LOSS = -1
    TIE = 0
    WIN = 1

    @property
    def reward(self) -> float:
        return float(self.value)


GAME_IDS = ("TicTacToe", "Diamant", "ExplodingKittens", "LoveLetter", "Stratego")


@dataclass
class GameState:
    """Common fields of every game's state; games subclass with their payload.

    ``turn_counter`` counts every player decision.  ``results`` is set
    exactly once, when the game finishes, and is immutable afterwards.
    """

    game: "Game"
    current_player: int
    turn_counter: int
    rng: Rng
    finished: bool = False
    results: tuple[Result, ...] | None = None

    # legal-action cache, keyed by turn_counter; never serialized or copied
    _legal_turn: int = field(default=-1, repr=False, compare=False)
    _legal: list[int] = field(default_factory=list, repr=False, compare=False)
    _legal_set: frozenset = field(default=frozenset(), repr=False, compare=False)

    @property
    def n_players(self) -> int:
        return self.game.n_players

    def finish(self, results: Sequence[Result]) -> None:
        if self.finished:
            raise GameError("results are immutable once finished")
        wins = sum(1 for r in results if r is Result.WIN)
        if wins > 1:
            raise GameError(f"at most one winner allowed, got {wins}")
        self.finished = True
        self.results = tuple(Result(r) for r in results)

    def base_fields(self) -> dict:
        """Common fields in canonical serialization order."""
        return {
            "game": self.game.game_id,
            "players": self.game.n_players,
            "current": self.current_player,
            "turns": self.turn_counter,
            "rng": list(self.rng.getstate()),
            "finished": self.finished,
            "results": None if self.results is None else [int(r) for r in self.results],
        }

    def copy_base_into(self, other: "GameState") -> None:
        other.game = self.game
        other.current_player = self.current_player
        other.turn_counter = self.turn_counter
        other.rng = self.rng.clone()
        other.finished = self.finished
        other.results = self.results
        other._legal_turn = -1
        other._legal = []
        other._legal_set = frozenset()


class Game:
    """Stateless rules object for one (game, player count) configuration."""

    game_id: str = ""
    min_players: int = 2
    max_players: int = 2
    # hard safety cap on total decisions; Stratego overrides with the
    # 800-decision draw rule, card games never get near 1000 in practice
    max_decisions: int = 1000
    reactive_turns: bool = False

    def __init__(self, n_players: int):
        if not (self.min_players <= n_players <= self.max_players):
            raise ConfigurationError(
                f"{self.game_id} supports {self.min_players}..{self.max_players} "
                f"players, got {n_players}"
            )
        self.n_players = n_players

    # -- rules interface -------------------------------------------------
    def reset(self, seed: int) -> GameState:
        raise NotImplementedError

    def compute_legal(self, state: GameState) -> list[int]:
        raise NotImplementedError

    def step(self, state: GameState, action: int) -> None:
        """Advance the state by one already-validated action."""
        raise NotImplementedError

    def adjudicate_cap(self, state: GameState) -> None:
        """Finish a state that hit ``max_decisions`` (rule-bug safety net)."""
        raise NotImplementedError

    def copy_state(self, state: GameState) -> GameState:
        raise NotImplementedError

    def payload_fields(self, state: GameState) -> dict:
        """Game payload in canonical serialization order (full, hidden info included)."""
        raise NotImplementedError

    # -- observation interface -------------------------------------------
    def observation_shape(self) -> tuple[int, ...]:
        raise NotImplementedError

    def vectorize(self, state: GameState, player: int):
        raise NotImplementedError

    def to_json(self, state: GameState, player: int) -> dict:
        raise NotImplementedError

    # -- action-space interface -------------------------------------------
    def build_tree(self):
        raise NotImplementedError

    # -- agent support ------------------------------------------------------
    def heuristic(self, state: GameState, player: int) -> float:
        """Progress score in (-1, 1) for non-terminal states (OSLA evaluation)."""
        return 0.0


# ---------------------------------------------------------------------------
# public forward-model API


def reset(game_id: str, n_players: int, seed: int) -> GameState:
    """Create a fresh Running state; all setup randomness comes from seed."""
    return make_game(game_id, n_players).reset(seed)


def legal_actions(state: GameState) -> list[int]:
    """Legal action-tree leaf ids, ascending; cached per decision."""
    if state.finished:
        raise TerminalStateError(f"{state.game.game_id}: game is finished")
    if state._legal_turn != state.turn_counter:
        acts = state.game.compute_legal(state)
        state._legal = acts
        state._legal_set = frozenset(acts)
        state._legal_turn = state.turn_counter
    return state._legal


def apply(state: GameState, action: int) -> GameState:
    """Apply one action, mutating ``state`` in place and returning it."""
    legal = legal_actions(state)  # raises TerminalStateError when finished
    if action not in state._legal_set:
        raise IllegalActionError(action, legal)
    state.game.step(state, action)
    state.turn_counter += 1
    if not state.finished and state.turn_counter >= state.game.max_decisions:
        state.game.adjudicate_cap(state)
    return state


def copy_state(state: GameState) -> GameState:
    """Deep, independent duplicate (rules object and rng stream included)."""
    return state.game.copy_state(state)


def current_player(state: GameState) -> int:
    if state.finished:
        raise TerminalStateError("no current player in a finished game")
    return state.current_player


def terminal_reward(state: GameState, player: int) -> float:
    """+1 / 0 / -1 for win / tie / loss; 0 while the game is running."""
    if not state.finished:
        return 0.0
    return state.results[player].reward


def state_dict(state: GameState) -> dict:
    """Canonical full-state serialization (fixed field order, hidden info included)."""
    doc = state.base_fields()
    doc["payload"] = state.game.payload_fields(state)
    return doc


def state_hash(state: GameState) -> str:
    """SHA-256 over the canonical serialization; the engine's state identity."""
    blob = json.dumps(state_dict(state), separators=(",", ":"), sort_keys=False)
    return hashlib.sha256(blob.encode()).hexdigest()


# ---------------------------------------------------------------------------
# registry

_REGISTRY: dict[str, type] = {}
_INSTANCES: dict[tuple[str, int], Game] = {}


def register(cls: type) -> type:
    _REGISTRY[cls.game_id] = cls
    return cls


def make_game(game_id: str, n_players: int) -> Game:
    """Shared, immutable rules instance for a (game, players) config."""
    if game_id not in _REGISTRY:
        from . import games  # noqa: F401  -- populates the registry

    cls = _REGISTRY.get(game_id)
    if cls is None:
        raise ConfigurationError(
            f"unknown game {game_id!r}; supported: {', '.join(sorted(_REGISTRY))}"
        )
    key = (game_id, n_players)
    if key not in _INSTANCES:
        _INSTANCES[key] = cls(n_players)
    return _INSTANCES[key]


def supported_games() -> list[str]:
    if not _REGISTRY:
        from . import games  # noqa: F401

    return sorted(_REGISTRY)
