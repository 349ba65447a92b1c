"""Tic Tac Toe: 3x3 grid, two players alternate, three in a line wins."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from ..core import Game, GameState, Result, register
from ..actions import ActionTree, TreeBuilder
from ..rng import Rng

LINES = (
    (0, 1, 2), (3, 4, 5), (6, 7, 8),
    (0, 3, 6), (1, 4, 7), (2, 5, 8),
    (0, 4, 8), (2, 4, 6),
)

EMPTY = -1


@dataclass
class TicTacToeState(GameState):
    board: list[int] = field(default_factory=lambda: [EMPTY] * 9)


@register
class TicTacToe(Game):
    game_id = "TicTacToe"
    min_players = 2
    max_players = 2

    def reset(self, seed: int) -> TicTacToeState:
        return TicTacToeState(
            game=self, current_player=0, turn_counter=0, rng=Rng(seed)
        )

    def compute_legal(self, state: TicTacToeState) -> list[int]:
        board = state.board
        return [i for i in range(9) if board[i] == EMPTY]

    def step(self, state: TicTacToeState, action: int) -> None:
        me = state.current_player
        state.board[action] = me
        board = state.board
        for a, b, c in LINES:
            if board[a] == me and board[b] == me and board[c] == me:
                results = [Result.LOSS, Result.LOSS]
                results[me] = Result.WIN
                state.finish(results)
                return
        if EMPTY not in board:
            state.finish([Result.TIE, Result.TIE])
            return
        state.current_player = 1 - me

    def adjudicate_cap(self, state: TicTacToeState) -> None:
        state.finish([Result.TIE, Result.TIE])  # unreachable: board fills in 9 moves

    def copy_state(self, state: TicTacToeState) -> TicTacToeState:
        c = TicTacToeState.__new__(TicTacToeState)
        state.copy_base_into(c)
        c.board = state.board.copy()
        return c

    def payload_fields(self, state: TicTacToeState) -> dict:
        return {"board": state.board}

    def build_tree(self) -> ActionTree:
        tb = TreeBuilder()
        rows = [
            tb.category(f"row{r}", [tb.leaf(f"place r{r}c{c}") for c in range(3)])
            for r in range(3)
        ]
        return tb.finish(self.game_id, self.n_players, rows)

    def observation_shape(self) -> tuple[int, ...]:
        return (9,)

    def vectorize(self, state: TicTacToeState, player: int) -> np.ndarray:
        obs = np.zeros(9, dtype=np.float32)
        for i, owner in enumerate(state.board):
            if owner == player:
                obs[i] = 1.0
            elif owner != EMPTY:
                obs[i] = -1.0
        return obs

    def to_json(self, state: TicTacToeState, player: int) -> dict:
        return {
            "player": player,
            "to_move": None if state.finished else state.current_player,
            "board": [None if c == EMPTY else c for c in state.board],
        }
