"""Concrete rules implementations behind the core forward-model interface."""

from dataclasses import dataclass

from .tictactoe import TicTacToe
from .diamant import Diamant
from .kittens import ExplodingKittens
from .loveletter import LoveLetter
from .stratego import Stratego

# informational only (rough mean decisions per player in self-play)
_TYPICAL_LENGTH = {
    "TicTacToe": 4,
    "Diamant": 15,
    "ExplodingKittens": 33,
    "LoveLetter": 23,
    "Stratego": 350,
}


@dataclass(frozen=True)
class GameSpec:
    """Single source of truth for per-configuration shapes and constants."""

    game_id: str
    n_players: int
    min_players: int
    max_players: int
    observation_shape: tuple[int, ...]
    action_count: int
    typical_episode_length: int
    reactive_turns: bool


def game_spec(game_id: str, n_players: int) -> GameSpec:
    from ..core import make_game

    game = make_game(game_id, n_players)
    return GameSpec(
        game_id=game.game_id,
        n_players=n_players,
        min_players=game.min_players,
        max_players=game.max_players,
        observation_shape=game.observation_shape(),
        action_count=game.build_tree().leaf_count,
        typical_episode_length=_TYPICAL_LENGTH[game.game_id],
        reactive_turns=game.reactive_turns,
    )


__all__ = ["TicTacToe", "Diamant", "ExplodingKittens", "LoveLetter", "Stratego",
           "GameSpec", "game_spec"]
