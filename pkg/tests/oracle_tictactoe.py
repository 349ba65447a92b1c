"""Independent brute-force Tic Tac Toe oracle.

Deliberately shares no code with the engine: its own board encoding, its
own terminal detection, its own move generator.  Enumerates every reachable
position, computes minimax values, and the exact outcome distribution of
uniform-random self-play as rational numbers.
"""

from fractions import Fraction
from functools import lru_cache

WIN_TRIPLES = (
    (0, 1, 2), (3, 4, 5), (6, 7, 8),
    (0, 3, 6), (1, 4, 7), (2, 5, 8),
    (0, 4, 8), (2, 4, 6),
)

# board: 9-tuple of ' ', 'X' (player 0), 'O' (player 1)
EMPTY_BOARD = (" ",) * 9


def winner(board):
    for a, b, c in WIN_TRIPLES:
        if board[a] != " " and board[a] == board[b] == board[c]:
            return 0 if board[a] == "X" else 1
    return None


def is_full(board):
    return " " not in board


def to_move(board):
    xs = sum(1 for c in board if c == "X")
    os = sum(1 for c in board if c == "O")
    return 0 if xs == os else 1


def moves(board):
    return [i for i in range(9) if board[i] == " "]


def play(board, cell):
    mark = "X" if to_move(board) == 0 else "O"
    return board[:cell] + (mark,) + board[cell + 1:]


def reachable_positions():
    """All positions reachable from the empty board, with one witness
    move sequence each.  Terminal positions are included."""
    seen = {EMPTY_BOARD: ()}
    frontier = [EMPTY_BOARD]
    while frontier:
        nxt = []
        for board in frontier:
            if winner(board) is not None or is_full(board):
                continue
            for cell in moves(board):
                child = play(board, cell)
                if child not in seen:
                    seen[child] = seen[board] + (cell,)
                    nxt.append(child)
        frontier = nxt
    return seen


@lru_cache(maxsize=None)
def minimax(board):
    """Game value from player 0's perspective under perfect play."""
    w = winner(board)
    if w is not None:
        return 1 if w == 0 else -1
    if is_full(board):
        return 0
    values = [minimax(play(board, c)) for c in moves(board)]
    return max(values) if to_move(board) == 0 else min(values)


@lru_cache(maxsize=None)
def random_play_outcome(board):
    """Exact (P(player0 wins), P(player1 wins), P(draw)) under uniform
    random play by both sides, as Fractions."""
    w = winner(board)
    if w is not None:
        return (Fraction(1), Fraction(0), Fraction(0)) if w == 0 else (
            Fraction(0), Fraction(1), Fraction(0))
    if is_full(board):
        return (Fraction(0), Fraction(0), Fraction(1))
    ms = moves(board)
    p = Fraction(1, len(ms))
    totals = [Fraction(0), Fraction(0), Fraction(0)]
    for c in ms:
        sub = random_play_outcome(play(board, c))
        for i in range(3):
            totals[i] += p * sub[i]
    return tuple(totals)
