"""Player-perspective observation encoders.

``vectorize`` returns the fixed-length numeric encoding fed to networks
(a planes x 10 x 10 tensor for Stratego, a flat vector elsewhere);
``to_json`` returns the structured document mirroring the same visible
components.  Both are pure functions of (state, player) and never expose
information hidden from the observing player; per-game layouts are
documented in docs/observations.md.
"""

from __future__ import annotations

import numpy as np

from .core import ConfigurationError, GameState


def vectorize(state: GameState, player: int) -> np.ndarray:
    if not (0 <= player < state.game.n_players):
        raise ConfigurationError(f"player {player} out of range")
    return state.game.vectorize(state, player)


def to_json(state: GameState, player: int) -> dict:
    if not (0 <= player < state.game.n_players):
        raise ConfigurationError(f"player {player} out of range")
    return state.game.to_json(state, player)


def observation_shape(game_id: str, n_players: int) -> tuple[int, ...]:
    from .core import make_game

    return make_game(game_id, n_players).observation_shape()
