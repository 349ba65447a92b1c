"""Stratego: classic 40-piece armies on a 10x10 board with two lakes.

Piece identity is hidden until it fights.  A player wins by capturing the
flag or leaving the opponent without a legal move; the game is declared a
draw after 800 total decisions (400 per side).  Armies start from one of
four fixed deployment templates picked per player from the match seed;
free deployment is out of scope.

The fixed action space enumerates every (source square, direction,
distance) whose path stays on the board and clear of lakes -- scouts are
the only pieces that use distances above 1, enforced by the per-state mask.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from ..core import Game, GameState, Result, register
from ..actions import ActionTree, TreeBuilder
from ..rng import Rng

FLAG, SPY, SCOUT, MINER, SERGEANT, LIEUTENANT, CAPTAIN, MAJOR, COLONEL, \
    GENERAL, MARSHAL, BOMB = range(12)
N_RANKS = 12
RANK_COUNTS = (1, 1, 8, 5, 4, 4, 4, 3, 2, 1, 1, 6)
RANK_NAMES = ("flag", "spy", "scout", "miner", "sergeant", "lieutenant",
              "captain", "major", "colonel", "general", "marshal", "bomb")

SIZE = 10
LAKES = frozenset(
    r * SIZE + c for r in (4, 5) for c in (2, 3, 6, 7)
)
EMPTY = -1

DIRS = ((-1, 0), (0, 1), (1, 0), (0, -1))
DIR_NAMES = ("north", "east", "south", "west")

# deployment templates, 4 rows of 10 from the owner's back rank outwards
_TEMPLATE_CHARS = {"F": FLAG, "Y": SPY, "S": SCOUT, "M": MINER, "4": SERGEANT,
                   "5": LIEUTENANT, "6": CAPTAIN, "7": MAJOR, "8": COLONEL,
                   "9": GENERAL, "X": MARSHAL, "B": BOMB}
TEMPLATES = (
    ("FB4567845S", "BBMM46S57M", "SMX9864SMS", "SS57BB6SBY"),
    ("S5487654BF", "M75S64MMBB", "SMS4689XMS", "YBS6BB75SS"),
    ("45S6FB65S4", "B7MBXB9M7B", "SM4S8M5S8M", "6SY7S45S6B"),
    ("54S6BFB6S5", "MB4BMB74MB", "S8Y9X87S5M", "SM5S46S7S6"),
)

# material values for the progress heuristic; full army sums to 163
PIECE_VALUES = (0, 5, 2, 4, 3, 4, 5, 6, 8, 10, 12, 3)
ARMY_VALUE = sum(v * c for v, c in zip(PIECE_VALUES, RANK_COUNTS))


def encode_piece(owner: int, rank: int, revealed: bool) -> int:
    return rank + 12 * owner + (24 if revealed else 0)


def piece_rank(piece: int) -> int:
    return piece % 12

def piece_owner(piece: int) -> int:
    return (piece % 24) // 12

def piece_revealed(piece: int) -> bool:
    return piece >= 24


def reveal(piece: int) -> int:
    return piece if piece >= 24 else piece + 24


@dataclass
class StrategoState(GameState):
    board: list[int] = field(default_factory=lambda: [EMPTY] * 100)


@register
class Stratego(Game):
    game_id = "Stratego"
    min_players = 2
    max_players = 2
    max_decisions = 800  # the draw rule: 400 decisions per side

    def __init__(self, n_players: int):
        super().__init__(n_players)
        self._build_move_table()

    def _build_move_table(self) -> None:
        """Enumerate all (src, dir, dist) with a board-bounded, lake-free path."""
        self._moves: list[tuple[int, int, int]] = []
        self._leaf_of = {}
        tb = TreeBuilder()
        categories = []
        for src in range(100):
            if src in LAKES:
                continue
            r, c = divmod(src, SIZE)
            children = []
            for d, (dr, dc) in enumerate(DIRS):
                for dist in range(1, SIZE):
                    rr, cc = r + dr * dist, c + dc * dist
                    if not (0 <= rr < SIZE and 0 <= cc < SIZE):
                        break
                    if rr * SIZE + cc in LAKES:
                        break
                    node = tb.leaf(f"move r{r}c{c} {DIR_NAMES[d]} {dist}")
                    self._leaf_of[(src, d, dist)] = node.leaf_index
                    self._moves.append((src, d, dist))
                    children.append(node)
            if children:
                categories.append(tb.category(f"from r{r}c{c}", children))
        self._tree = tb.finish("Stratego", 2, categories)

    def reset(self, seed: int) -> StrategoState:
        rng = Rng(seed)
        board = [EMPTY] * 100
        for owner in range(2):
            rows = TEMPLATES[rng.randrange(len(TEMPLATES))]
            for trow, line in enumerate(rows):
                for tcol, ch in enumerate(line):
                    rank = _TEMPLATE_CHARS[ch]
                    if owner == 0:
                        r, c = 9 - trow, tcol
                    else:
                        r, c = trow, 9 - tcol
                    board[r * SIZE + c] = encode_piece(owner, rank, False)
        return StrategoState(
            game=self, current_player=0, turn_counter=0, rng=rng, board=board
        )

    # -- movement ----------------------------------------------------------
    def compute_legal(self, state: StrategoState) -> list[int]:
        return self._moves_for(state, state.current_player, first_only=False)

    def _moves_for(self, state: StrategoState, player: int,
                   first_only: bool) -> list[int]:
        board = state.board
        acts: list[int] = []
        leaf_of = self._leaf_of
        for src in range(100):
            piece = board[src]
            if piece == EMPTY or piece_owner(piece) != player:
                continue
            rank = piece_rank(piece)
            if rank == FLAG or rank == BOMB:
                continue
            r, c = divmod(src, SIZE)
            max_dist = 9 if rank == SCOUT else 1
            for d, (dr, dc) in enumerate(DIRS):
                for dist in range(1, max_dist + 1):
                    rr, cc = r + dr * dist, c + dc * dist
                    if not (0 <= rr < SIZE and 0 <= cc < SIZE):
                        break
                    dst = rr * SIZE + cc
                    if dst in LAKES:
                        break
                    occupant = board[dst]
                    if occupant != EMPTY:
                        if piece_owner(occupant) != player:
                            acts.append(leaf_of[(src, d, dist)])
                            if first_only:
                                return acts
                        break
                    acts.append(leaf_of[(src, d, dist)])
                    if first_only:
                        return acts
        acts.sort()
        return acts

    def step(self, state: StrategoState, action: int) -> None:
        src, d, dist = self._moves[action]
        dr, dc = DIRS[d]
        dst = src + (dr * SIZE + dc) * dist
        board = state.board
        me = state.current_player
        attacker = board[src]
        defender = board[dst]
        board[src] = EMPTY
        if defender == EMPTY:
            board[dst] = attacker
        else:
            a_rank, d_rank = piece_rank(attacker), piece_rank(defender)
            if d_rank == FLAG:
                board[dst] = reveal(attacker)
                results = [Result.LOSS, Result.LOSS]
                results[me] = Result.WIN
                state.finish(results)
                return
            if d_rank == BOMB:
                if a_rank == MINER:
                    board[dst] = reveal(attacker)
                else:
                    board[dst] = reveal(defender)
            elif a_rank == SPY and d_rank == MARSHAL:
                board[dst] = reveal(attacker)
            elif a_rank > d_rank:
                board[dst] = reveal(attacker)
            elif a_rank == d_rank:
                board[dst] = EMPTY
            else:
                board[dst] = reveal(defender)
        opponent = 1 - me
        if not self._moves_for(state, opponent, first_only=True):
            results = [Result.LOSS, Result.LOSS]
            results[me] = Result.WIN
            state.finish(results)
            return
        state.current_player = opponent

    def adjudicate_cap(self, state: StrategoState) -> None:
        state.finish([Result.TIE, Result.TIE])

    def copy_state(self, state: StrategoState) -> StrategoState:
        c = StrategoState.__new__(StrategoState)
        state.copy_base_into(c)
        c.board = state.board.copy()
        return c

    def payload_fields(self, state: StrategoState) -> dict:
        return {"board": state.board}

    def build_tree(self) -> ActionTree:
        return self._tree

    def observation_shape(self) -> tuple[int, ...]:
        return (27, SIZE, SIZE)

    def vectorize(self, state: StrategoState, player: int) -> np.ndarray:
        """27 planes: 0-11 own ranks, 12 own-revealed, 13-24 opponent ranks
        when revealed by combat, 25 hidden opponent pieces, 26 lakes.  The
        board is rotated so the observer's back rank is always row 9."""
        obs = np.zeros((27, SIZE, SIZE), dtype=np.float32)
        board = state.board
        for idx in range(100):
            piece = board[idx]
            if piece == EMPTY:
                continue
            r, c = divmod(idx, SIZE)
            if player == 1:
                r, c = SIZE - 1 - r, SIZE - 1 - c
            if piece_owner(piece) == player:
                obs[piece_rank(piece), r, c] = 1.0
                if piece_revealed(piece):
                    obs[12, r, c] = 1.0
            elif piece_revealed(piece):
                obs[13 + piece_rank(piece), r, c] = 1.0
            else:
                obs[25, r, c] = 1.0
        for idx in LAKES:
            r, c = divmod(idx, SIZE)
            obs[26, r, c] = 1.0  # symmetric under the 180-degree rotation
        return obs

    def to_json(self, state: StrategoState, player: int) -> dict:
        cells = []
        for idx in range(100):
            piece = state.board[idx]
            if piece == EMPTY:
                continue
            owner = piece_owner(piece)
            visible = owner == player or piece_revealed(piece)
            r, c = divmod(idx, SIZE)
            cells.append({
                "r": r, "c": c, "owner": owner,
                "rank": piece_rank(piece) if visible else None,
                "revealed": piece_revealed(piece),
            })
        return {
            "player": player,
            "pieces": cells,
            "lakes": sorted(LAKES),
            "to_move": None if state.finished else state.current_player,
            "decisions": state.turn_counter,
        }

    def heuristic(self, state: StrategoState, player: int) -> float:
        mine = theirs = 0
        for piece in state.board:
            if piece == EMPTY:
                continue
            value = PIECE_VALUES[piece_rank(piece)]
            if piece_owner(piece) == player:
                mine += value
            else:
                theirs += value
        return max(-0.95, min(0.95, (mine - theirs) / ARMY_VALUE))
