"""Love Letter: classic 16-card deck, first to the token target wins.

Rounds: shuffle, burn one card face down (2-player games also burn three
face up), deal one card each.  A turn is an automatic draw followed by
playing one of the two held cards, resolving its effect.  Last player
standing, or the highest card when the deck runs dry, takes the round's
favour token; 7 / 5 / 4 tokens win the game for 2 / 3 / 4 players.

Targeted cards can only name live, unprotected opponents; with no valid
target they are played with no effect (the per-type "base" leaf).  Priest
and Baron reveals grant no tracked knowledge here: the vector observation
carries only public information plus the player's own hand.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from ..core import Game, GameState, Result, register
from ..actions import ActionTree, TreeBuilder
from ..rng import Rng

GUARD, PRIEST, BARON, HANDMAID, PRINCE, KING, COUNTESS, PRINCESS = range(8)
N_TYPES = 8
COPIES = (5, 2, 2, 2, 2, 1, 1, 1)
CARD_NAMES = ("guard", "priest", "baron", "handmaid", "prince", "king",
              "countess", "princess")
TOKEN_TARGET = {2: 7, 3: 5, 4: 4}


def card_value(card: int) -> int:
    return card + 1


@dataclass
class LoveLetterState(GameState):
    deck: list[int] = field(default_factory=list)
    burned: int = -1
    faceup: list[int] = field(default_factory=list)
    hands: list[list[int]] = field(default_factory=list)
    discards: list[list[int]] = field(default_factory=list)
    tokens: list[int] = field(default_factory=list)
    alive: list[bool] = field(default_factory=list)
    protected: list[bool] = field(default_factory=list)
    round_no: int = 0


@register
class LoveLetter(Game):
    game_id = "LoveLetter"
    min_players = 2
    max_players = 4

    def __init__(self, n_players: int):
        super().__init__(n_players)
        self._layout = _Layout(n_players)
        self.token_target = TOKEN_TARGET[n_players]

    def reset(self, seed: int) -> LoveLetterState:
        state = LoveLetterState(
            game=self, current_player=0, turn_counter=0, rng=Rng(seed),
            tokens=[0] * self.n_players,
        )
        self._start_round(state, first=0)
        return state

    def _start_round(self, state: LoveLetterState, first: int) -> None:
        deck = [t for t in range(N_TYPES) for _ in range(COPIES[t])]
        state.rng.shuffle(deck)
        state.burned = deck.pop()
        state.faceup = [deck.pop() for _ in range(3)] if self.n_players == 2 else []
        state.hands = [[deck.pop()] for _ in range(self.n_players)]
        state.deck = deck
        state.discards = [[] for _ in range(self.n_players)]
        state.alive = [True] * self.n_players
        state.protected = [False] * self.n_players
        state.current_player = first
        state.hands[first].append(state.deck.pop())

    # -- legality ---------------------------------------------------------
    def compute_legal(self, state: LoveLetterState) -> list[int]:
        lay = self._layout
        p = state.current_player
        hand = state.hands[p]
        if COUNTESS in hand and (KING in hand or PRINCE in hand):
            return [lay.base[COUNTESS]]
        opponents = [
            q for q in range(self.n_players)
            if q != p and state.alive[q] and not state.protected[q]
        ]
        acts = []
        for card in set(hand):
            if card == GUARD:
                if opponents:
                    for q in opponents:
                        acts.extend(lay.guard[q][g] for g in range(1, N_TYPES))
                else:
                    acts.append(lay.base[GUARD])
            elif card in (PRIEST, BARON, KING):
                if opponents:
                    acts.extend(lay.target[card][q] for q in opponents)
                else:
                    acts.append(lay.base[card])
            elif card == PRINCE:
                acts.extend(lay.target[PRINCE][q] for q in opponents + [p])
            else:  # handmaid, countess, princess
                acts.append(lay.base[card])
        return sorted(acts)

    # -- transitions --------------------------------------------------------
    def step(self, state: LoveLetterState, action: int) -> None:
        lay = self._layout
        p = state.current_player
        card, target, guess = lay.decode(action)
        state.hands[p].remove(card)
        state.discards[p].append(card)

        if card == PRINCESS:
            self._eliminate(state, p)
        elif target >= 0:
            if card == GUARD:
                if state.hands[target] and state.hands[target][0] == guess:
                    self._eliminate(state, target)
            elif card == PRIEST:
                pass  # a peek grants no tracked information here
            elif card == BARON:
                mine, theirs = state.hands[p][0], state.hands[target][0]
                if mine > theirs:
                    self._eliminate(state, target)
                elif theirs > mine:
                    self._eliminate(state, p)
            elif card == PRINCE:
                dropped = state.hands[target].pop()
                state.discards[target].append(dropped)
                if dropped == PRINCESS:
                    state.alive[target] = False
                else:
                    state.hands[target].append(
                        state.deck.pop() if state.deck else state.burned)
            elif card == KING:
                state.hands[p], state.hands[target] = (
                    state.hands[target], state.hands[p])
        elif card == HANDMAID:
            state.protected[p] = True

        live = [q for q in range(self.n_players) if state.alive[q]]
        if len(live) == 1:
            self._award_round(state, live)
        elif not state.deck:
            self._award_round(state, self._showdown(state, live))
        else:
            q = p
            while True:
                q = (q + 1) % self.n_players
                if state.alive[q]:
                    break
            state.current_player = q
            state.protected[q] = False
            state.hands[q].append(state.deck.pop())

    def _eliminate(self, state: LoveLetterState, q: int) -> None:
        state.alive[q] = False
        while state.hands[q]:
            state.discards[q].append(state.hands[q].pop())

    def _showdown(self, state: LoveLetterState, live: list[int]) -> list[int]:
        best = max(state.hands[q][0] for q in live)
        top = [q for q in live if state.hands[q][0] == best]
        if len(top) > 1:
            sums = {q: sum(card_value(c) for c in state.discards[q]) for q in top}
            hi = max(sums.values())
            top = [q for q in top if sums[q] == hi]
        return top

    def _award_round(self, state: LoveLetterState, winners: list[int]) -> None:
        for q in winners:
            state.tokens[q] += 1
        state.round_no += 1
        reached = [q for q in range(self.n_players)
                   if state.tokens[q] >= self.token_target]
        if reached:
            if len(reached) == 1:
                results = [Result.WIN if q == reached[0] else Result.LOSS
                           for q in range(self.n_players)]
            else:
                results = [Result.TIE if q in reached else Result.LOSS
                           for q in range(self.n_players)]
            state.finish(results)
        else:
            self._start_round(state, first=min(winners))

    def adjudicate_cap(self, state: LoveLetterState) -> None:
        best = max(state.tokens)
        top = [q for q in range(self.n_players) if state.tokens[q] == best]
        if len(top) == 1:
            state.finish([Result.WIN if q == top[0] else Result.LOSS
                          for q in range(self.n_players)])
        else:
            state.finish([Result.TIE if q in top else Result.LOSS
                          for q in range(self.n_players)])

    def copy_state(self, state: LoveLetterState) -> LoveLetterState:
        c = LoveLetterState.__new__(LoveLetterState)
        state.copy_base_into(c)
        c.deck = state.deck.copy()
        c.burned = state.burned
        c.faceup = state.faceup.copy()
        c.hands = [h.copy() for h in state.hands]
        c.discards = [d.copy() for d in state.discards]
        c.tokens = state.tokens.copy()
        c.alive = state.alive.copy()
        c.protected = state.protected.copy()
        c.round_no = state.round_no
        return c

    def payload_fields(self, state: LoveLetterState) -> dict:
        return {
            "deck": state.deck,
            "burned": state.burned,
            "faceup": state.faceup,
            "hands": state.hands,
            "discards": state.discards,
            "tokens": state.tokens,
            "alive": state.alive,
            "protected": state.protected,
            "round_no": state.round_no,
        }

    def build_tree(self) -> ActionTree:
        return self._layout.tree

    def observation_shape(self) -> tuple[int, ...]:
        return (17 + 3 * self.n_players,)

    def vectorize(self, state: LoveLetterState, player: int) -> np.ndarray:
        n = self.n_players
        obs = np.zeros(17 + 3 * n, dtype=np.float32)
        for c in state.hands[player]:
            obs[c] = 1.0
        counts = [0] * N_TYPES
        for c in state.faceup:
            counts[c] += 1
        for pile in state.discards:
            for c in pile:
                counts[c] += 1
        for t in range(N_TYPES):
            obs[8 + t] = counts[t] / COPIES[t]
        for off in range(n):
            q = (player + off) % n
            obs[16 + off] = state.tokens[q] / self.token_target
            obs[16 + n + off] = 1.0 if state.alive[q] else 0.0
            obs[16 + 2 * n + off] = 1.0 if state.protected[q] else 0.0
        obs[16 + 3 * n] = len(state.deck) / 16.0
        return obs

    def to_json(self, state: LoveLetterState, player: int) -> dict:
        return {
            "player": player,
            "round": state.round_no,
            "hand": list(state.hands[player]),
            "deck_count": len(state.deck),
            "faceup": list(state.faceup),
            "discards": [list(d) for d in state.discards],
            "tokens": list(state.tokens),
            "alive": list(state.alive),
            "protected": list(state.protected),
            "to_move": None if state.finished else state.current_player,
        }

    def heuristic(self, state: LoveLetterState, player: int) -> float:
        score = 0.12 * state.tokens[player] + (0.05 if state.alive[player] else 0.0)
        return min(score, 0.99)


class _Layout:
    """68-leaf enumeration for 4 players: 8 base actions (play a type with no
    target), one leaf per (type, absolute target seat), and Guard targets
    expanded into 8 guesses each.  Never-legal leaves (self-targeting,
    guessing Guard) keep the shape regular."""

    def __init__(self, n_players: int):
        tb = TreeBuilder()
        self.base = [0] * N_TYPES
        self.target = [[0] * n_players for _ in range(N_TYPES)]
        self.guard = [[0] * N_TYPES for _ in range(n_players)]
        categories = []
        for t in range(N_TYPES):
            children = []
            node = tb.leaf(f"play {CARD_NAMES[t]} (no target)")
            self.base[t] = node.leaf_index
            children.append(node)
            for q in range(n_players):
                if t == GUARD:
                    for g in range(N_TYPES):
                        leaf = tb.leaf(
                            f"play guard on seat {q} guessing {CARD_NAMES[g]}")
                        self.guard[q][g] = leaf.leaf_index
                        children.append(leaf)
                else:
                    leaf = tb.leaf(f"play {CARD_NAMES[t]} on seat {q}")
                    self.target[t][q] = leaf.leaf_index
                    children.append(leaf)
            categories.append(tb.category(CARD_NAMES[t], children))
        self.tree = tb.finish("LoveLetter", n_players, categories)
        self._decode = {}
        for t in range(N_TYPES):
            self._decode[self.base[t]] = (t, -1, -1)
            for q in range(n_players):
                if t == GUARD:
                    for g in range(N_TYPES):
                        self._decode[self.guard[q][g]] = (GUARD, q, g)
                else:
                    self._decode[self.target[t][q]] = (t, q, -1)

    def decode(self, leaf: int) -> tuple[int, int, int]:
        return self._decode[leaf]
