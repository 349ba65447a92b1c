"""Exploding Kittens: card game with reactive, interrupt-driven turn order.

Base 56-card box scaled to the table: every player is dealt 7 cards plus a
Defuse, then n-1 Exploding Kittens and the spare Defuses (two for 2-3
players, the remainder for 4) are shuffled into the draw pile.  A normal
turn is any number of card plays followed by a draw; Skip and Attack end
the turn without drawing.  Playing an action card opens a Nope window:
every other live player holding a Nope reacts in seat order (players
without one are passed over automatically), and Nope chains toggle the
effect.  Drawing a kitten kills you unless you defuse it, in which case you
choose where it goes back in the pile.  Last player alive wins.

Favor targets, Nope reactions and Defuse placements are decisions by the
reacting player, so ``current_player`` jumps out of seat order while the
turn itself stays with ``turn_player``.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from ..core import Game, GameState, Result, register
from ..actions import ActionTree, TreeBuilder
from ..rng import Rng

EK, DEFUSE, NOPE, FAVOR, SKIP, ATTACK, SHUFFLE, FUTURE = range(8)
CAT0 = 8
N_TYPES = 13

TYPE_NAMES = (
    "exploding kitten", "defuse", "nope", "favor", "skip", "attack",
    "shuffle", "see the future", "taco cat", "beard cat", "rainbow cat",
    "potato cat", "watermelon cat",
)

# full-box counts for the non-kitten, non-defuse cards
BOX = {NOPE: 5, FAVOR: 4, SKIP: 4, ATTACK: 4, SHUFFLE: 4, FUTURE: 5,
       CAT0: 4, CAT0 + 1: 4, CAT0 + 2: 4, CAT0 + 3: 4, CAT0 + 4: 4}
HAND_SIZE = 7
TOTAL_DEFUSES = 6

MAIN, NOPE_WINDOW, FAVOR_RESPONSE, DEFUSE_PLACEMENT = range(4)
PHASE_NAMES = ("main", "nope_window", "favor_response", "defuse_placement")

PLACE_DEPTHS = 5  # explicit insert depths 0..4, plus a bottom leaf


def spare_defuses(n_players: int) -> int:
    return 2 if n_players <= 3 else TOTAL_DEFUSES - n_players


def initial_pile_size(n_players: int) -> int:
    stock = sum(BOX.values())
    return stock - HAND_SIZE * n_players + (n_players - 1) + spare_defuses(n_players)


@dataclass
class KittensState(GameState):
    pile: list[int] = field(default_factory=list)      # end of list = top
    hands: list[list[int]] = field(default_factory=list)  # per-seat type counts
    discard: list[int] = field(default_factory=list)
    alive: list[bool] = field(default_factory=list)
    phase: int = MAIN
    turn_player: int = 0
    pending_draws: int = 1
    pending: tuple | None = None      # (card, actor, target) awaiting resolution
    nope_count: int = 0
    window: list[int] = field(default_factory=list)


@register
class ExplodingKittens(Game):
    game_id = "ExplodingKittens"
    min_players = 2
    max_players = 4
    reactive_turns = True

    def __init__(self, n_players: int):
        super().__init__(n_players)
        self._layout = _Layout(n_players)
        self._pile0 = initial_pile_size(n_players)

    def reset(self, seed: int) -> KittensState:
        n = self.n_players
        rng = Rng(seed)
        stock = []
        for t, count in BOX.items():
            stock.extend([t] * count)
        rng.shuffle(stock)
        hands = []
        for p in range(n):
            hand = [0] * N_TYPES
            for _ in range(HAND_SIZE):
                hand[stock.pop()] += 1
            hand[DEFUSE] += 1
            hands.append(hand)
        pile = stock
        pile.extend([EK] * (n - 1))
        pile.extend([DEFUSE] * spare_defuses(n))
        rng.shuffle(pile)
        return KittensState(
            game=self, current_player=0, turn_counter=0, rng=rng,
            pile=pile, hands=hands, discard=[0] * N_TYPES, alive=[True] * n,
        )

    # -- legality ---------------------------------------------------------
    def compute_legal(self, state: KittensState) -> list[int]:
        lay = self._layout
        p = state.current_player
        hand = state.hands[p]
        if state.phase == MAIN:
            acts = [lay.draw]
            for t, leaf in ((SKIP, lay.skip), (ATTACK, lay.attack),
                            (SHUFFLE, lay.shuffle), (FUTURE, lay.future)):
                if hand[t]:
                    acts.append(leaf)
            if hand[FAVOR]:
                for off in range(1, self.n_players):
                    q = (p + off) % self.n_players
                    if state.alive[q] and sum(state.hands[q]):
                        acts.append(lay.favor[off - 1])
            for c in range(5):
                if hand[CAT0 + c] >= 2:
                    for off in range(1, self.n_players):
                        q = (p + off) % self.n_players
                        if state.alive[q] and sum(state.hands[q]):
                            acts.append(lay.cat[c][off - 1])
            return sorted(acts)
        if state.phase == NOPE_WINDOW:
            return [lay.nope, lay.pass_]
        if state.phase == FAVOR_RESPONSE:
            return [lay.give[t] for t in range(N_TYPES) if hand[t]]
        # DEFUSE_PLACEMENT
        acts = [lay.place[d] for d in range(PLACE_DEPTHS) if d <= len(state.pile)]
        acts.append(lay.place_bottom)
        return sorted(acts)

    # -- transitions --------------------------------------------------------
    def step(self, state: KittensState, action: int) -> None:
        lay = self._layout
        p = state.current_player
        if state.phase == MAIN:
            if action == lay.draw:
                self._draw(state)
                return
            card, target = lay.decode_play(action, p, self.n_players)
            copies = 2 if card >= CAT0 else 1
            state.hands[p][card] -= copies
            state.discard[card] += copies
            state.pending = (card, p, target)
            self._open_window(state, p)
            return
        if state.phase == NOPE_WINDOW:
            if action == lay.nope:
                state.hands[p][NOPE] -= 1
                state.discard[NOPE] += 1
                state.nope_count += 1
                self._fill_window(state, p)
            else:
                state.window.pop(0)
            if state.window:
                state.current_player = state.window[0]
            else:
                self._resolve(state)
            return
        if state.phase == FAVOR_RESPONSE:
            give = lay.decode_give(action)
            _, actor, _ = state.pending
            state.hands[p][give] -= 1
            state.hands[actor][give] += 1
            state.pending = None
            state.phase = MAIN
            state.current_player = state.turn_player
            return
        # DEFUSE_PLACEMENT
        depth = lay.decode_place(action, len(state.pile))
        state.pile.insert(len(state.pile) - depth, EK)
        state.phase = MAIN
        self._end_turn(state)

    def _open_window(self, state: KittensState, actor: int) -> None:
        self._fill_window(state, actor)
        state.nope_count = 0
        if state.window:
            state.phase = NOPE_WINDOW
            state.current_player = state.window[0]
        else:
            self._resolve(state)

    def _fill_window(self, state: KittensState, after: int) -> None:
        n = self.n_players
        state.window = [
            (after + off) % n
            for off in range(1, n)
            if state.alive[(after + off) % n]
            and state.hands[(after + off) % n][NOPE] > 0
        ]

    def _resolve(self, state: KittensState) -> None:
        card, actor, target = state.pending
        state.pending = None
        state.phase = MAIN
        state.current_player = state.turn_player
        if state.nope_count % 2 == 1:
            state.nope_count = 0
            return  # effect cancelled; actor resumes their turn
        state.nope_count = 0
        if card == SKIP:
            self._end_turn(state)
        elif card == ATTACK:
            self._advance(state, attacked=True)
        elif card == SHUFFLE:
            state.rng.shuffle(state.pile)
        elif card == FUTURE:
            pass  # peeking grants no tracked information in this implementation
        elif card == FAVOR:
            if state.alive[target] and sum(state.hands[target]):
                state.phase = FAVOR_RESPONSE
                state.pending = (card, actor, target)
                state.current_player = target
        else:  # cat pair steal
            hand = state.hands[target]
            size = sum(hand)
            if state.alive[target] and size:
                pick = state.rng.randrange(size)
                for t in range(N_TYPES):
                    pick -= hand[t]
                    if pick < 0:
                        hand[t] -= 1
                        state.hands[actor][t] += 1
                        break

    def _draw(self, state: KittensState) -> None:
        p = state.turn_player
        card = state.pile.pop()
        if card != EK:
            state.hands[p][card] += 1
            self._end_turn(state)
            return
        if state.hands[p][DEFUSE]:
            state.hands[p][DEFUSE] -= 1
            state.discard[DEFUSE] += 1
            state.phase = DEFUSE_PLACEMENT
            state.current_player = p
            return
        state.alive[p] = False
        state.discard[EK] += 1
        hand = state.hands[p]
        for t in range(N_TYPES):
            state.discard[t] += hand[t]
            hand[t] = 0
        survivors = [q for q in range(self.n_players) if state.alive[q]]
        if len(survivors) == 1:
            results = [Result.WIN if q == survivors[0] else Result.LOSS
                       for q in range(self.n_players)]
            state.finish(results)
            return
        self._advance(state, attacked=False)

    def _end_turn(self, state: KittensState) -> None:
        state.pending_draws -= 1
        if state.pending_draws > 0:
            state.current_player = state.turn_player
        else:
            self._advance(state, attacked=False)

    def _advance(self, state: KittensState, attacked: bool) -> None:
        n = self.n_players
        q = state.turn_player
        while True:
            q = (q + 1) % n
            if state.alive[q]:
                break
        state.turn_player = q
        state.current_player = q
        state.pending_draws = 2 if attacked else 1
        state.phase = MAIN

    def adjudicate_cap(self, state: KittensState) -> None:
        state.finish([Result.TIE if a else Result.LOSS for a in state.alive])

    def copy_state(self, state: KittensState) -> KittensState:
        c = KittensState.__new__(KittensState)
        state.copy_base_into(c)
        c.pile = state.pile.copy()
        c.hands = [h.copy() for h in state.hands]
        c.discard = state.discard.copy()
        c.alive = state.alive.copy()
        c.phase = state.phase
        c.turn_player = state.turn_player
        c.pending_draws = state.pending_draws
        c.pending = state.pending
        c.nope_count = state.nope_count
        c.window = state.window.copy()
        return c

    def payload_fields(self, state: KittensState) -> dict:
        return {
            "pile": state.pile,
            "hands": state.hands,
            "discard": state.discard,
            "alive": state.alive,
            "phase": state.phase,
            "turn_player": state.turn_player,
            "pending_draws": state.pending_draws,
            "pending": list(state.pending) if state.pending else None,
            "nope_count": state.nope_count,
            "window": state.window,
        }

    def build_tree(self) -> ActionTree:
        return self._layout.tree

    def observation_shape(self) -> tuple[int, ...]:
        return (13 + 2 * (self.n_players - 1) + 1 + 4,)

    def vectorize(self, state: KittensState, player: int) -> np.ndarray:
        n = self.n_players
        obs = np.zeros(13 + 2 * (n - 1) + 5, dtype=np.float32)
        hand = state.hands[player]
        for t in range(N_TYPES):
            obs[t] = min(hand[t] / 6.0, 1.0)
        at = 13
        for off in range(1, n):
            q = (player + off) % n
            obs[at] = min(sum(state.hands[q]) / 15.0, 1.0)
            obs[at + (n - 1)] = 1.0 if state.alive[q] else 0.0
            at += 1
        at = 13 + 2 * (n - 1)
        obs[at] = len(state.pile) / self._pile0
        obs[at + 1 + state.phase] = 1.0
        return obs

    def to_json(self, state: KittensState, player: int) -> dict:
        n = self.n_players
        return {
            "player": player,
            "phase": PHASE_NAMES[state.phase],
            "hand": list(state.hands[player]),
            "opponents": [
                {
                    "seat": (player + off) % n,
                    "alive": state.alive[(player + off) % n],
                    "hand_count": sum(state.hands[(player + off) % n]),
                }
                for off in range(1, n)
            ],
            "draw_count": len(state.pile),
            "discard": list(state.discard),
            "pending_draws": state.pending_draws,
            "pending": list(state.pending) if state.pending else None,
            "turn_player": state.turn_player,
            "to_move": None if state.finished else state.current_player,
        }

    def heuristic(self, state: KittensState, player: int) -> float:
        if not state.alive[player]:
            return 0.0
        return 0.5 + 0.01 * min(sum(state.hands[player]), 20)


class _Layout:
    """Flat leaf indices of the fixed action tree for one player count."""

    def __init__(self, n_players: int):
        tb = TreeBuilder()
        self.draw = 0
        turn = tb.category("turn", [tb.leaf("draw a card")])
        play_children = []
        for name, attr in (("skip", "skip"), ("attack", "attack"),
                           ("shuffle", "shuffle"), ("see the future", "future")):
            node = tb.leaf(f"play {name}")
            setattr(self, attr, node.leaf_index)
            play_children.append(node)
        self.favor = []
        for off in range(1, n_players):
            node = tb.leaf(f"play favor on seat +{off}")
            self.favor.append(node.leaf_index)
            play_children.append(node)
        self.cat = []
        for c in range(5):
            leaves = []
            for off in range(1, n_players):
                node = tb.leaf(f"play {TYPE_NAMES[CAT0 + c]} pair on seat +{off}")
                leaves.append(node.leaf_index)
                play_children.append(node)
            self.cat.append(leaves)
        play = tb.category("play", play_children)
        nope_node = tb.leaf("play nope")
        pass_node = tb.leaf("pass")
        self.nope, self.pass_ = nope_node.leaf_index, pass_node.leaf_index
        react = tb.category("react", [nope_node, pass_node])
        self.give = []
        give_children = []
        for t in range(N_TYPES):
            node = tb.leaf(f"give {TYPE_NAMES[t]}")
            self.give.append(node.leaf_index)
            give_children.append(node)
        give = tb.category("favor response", give_children)
        self.place = []
        place_children = []
        for d in range(PLACE_DEPTHS):
            node = tb.leaf(f"put kitten back at depth {d}")
            self.place.append(node.leaf_index)
            place_children.append(node)
        bottom = tb.leaf("put kitten back at the bottom")
        self.place_bottom = bottom.leaf_index
        place_children.append(bottom)
        place = tb.category("defuse placement", place_children)
        self.tree = tb.finish("ExplodingKittens", n_players,
                              [turn, play, react, give, place])

    def decode_play(self, leaf: int, actor: int, n: int) -> tuple[int, int]:
        """Leaf id -> (card type, absolute target seat or -1)."""
        if leaf == self.skip:
            return SKIP, -1
        if leaf == self.attack:
            return ATTACK, -1
        if leaf == self.shuffle:
            return SHUFFLE, -1
        if leaf == self.future:
            return FUTURE, -1
        if leaf in self.favor:
            off = self.favor.index(leaf) + 1
            return FAVOR, (actor + off) % n
        for c in range(5):
            if leaf in self.cat[c]:
                off = self.cat[c].index(leaf) + 1
                return CAT0 + c, (actor + off) % n
        raise AssertionError(f"not a play leaf: {leaf}")

    def decode_give(self, leaf: int) -> int:
        return self.give.index(leaf)

    def decode_place(self, leaf: int, pile_size: int) -> int:
        if leaf == self.place_bottom:
            return pile_size
        return self.place.index(leaf)
