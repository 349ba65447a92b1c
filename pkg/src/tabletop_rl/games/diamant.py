"""Diamant: push-your-luck cave exploration over five rounds.

Deck is 15 treasure tiles plus 5 hazard types x 3 copies.  Each decision
cycle every seat secretly chooses continue / return-to-camp (players already
at camp take a dummy observe action), then the cycle resolves: leavers bank
their pocket plus an even share of leftover path gems, and if anyone is
still exploring the next tile is revealed.  A second hazard of the same
type in one round busts everyone still in the cave; that hazard copy leaves
the game.  After round five the highest bank wins.

One player decision per seat per cycle; choices stay hidden until the cycle
resolves, which is how the tabletop game's simultaneous reveal is realized
in a sequential engine.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from ..core import Game, GameState, Result, register
from ..actions import ActionTree, TreeBuilder
from ..rng import Rng

TREASURES = (1, 2, 3, 4, 5, 5, 7, 7, 9, 11, 11, 13, 14, 15, 17)
HAZARD_TYPES = 5
HAZARD_COPIES = 3
ROUNDS = 5

CONTINUE, LEAVE, OBSERVE = 0, 1, 2

HAZARD_NAMES = ("snake", "spider", "lava", "rockfall", "ram")


@dataclass
class DiamantState(GameState):
    deck: list[int] = field(default_factory=list)          # +v treasure, -(t+1) hazard
    path: list[int] = field(default_factory=list)          # revealed this round
    path_gems: list[int] = field(default_factory=list)     # leftovers per revealed tile
    in_cave: list[bool] = field(default_factory=list)
    pocket: list[int] = field(default_factory=list)        # unbanked, this round
    banked: list[int] = field(default_factory=list)
    hazard_seen: list[int] = field(default_factory=list)   # per type, this round
    hazard_removed: list[int] = field(default_factory=list)  # per type, whole game
    round_no: int = 0
    choices: list = field(default_factory=list)             # pending, hidden


@register
class Diamant(Game):
    game_id = "Diamant"
    min_players = 2
    max_players = 4

    def reset(self, seed: int) -> DiamantState:
        n = self.n_players
        state = DiamantState(
            game=self,
            current_player=0,
            turn_counter=0,
            rng=Rng(seed),
            in_cave=[True] * n,
            pocket=[0] * n,
            banked=[0] * n,
            hazard_removed=[0] * HAZARD_TYPES,
            choices=[None] * n,
        )
        self._setup_round(state)
        return state

    def _setup_round(self, state: DiamantState) -> None:
        deck = list(TREASURES)
        for t in range(HAZARD_TYPES):
            deck.extend([-(t + 1)] * (HAZARD_COPIES - state.hazard_removed[t]))
        state.rng.shuffle(deck)
        state.deck = deck
        state.path = []
        state.path_gems = []
        state.hazard_seen = [0] * HAZARD_TYPES
        state.in_cave = [True] * self.n_players
        state.pocket = [0] * self.n_players
        state.choices = [None] * self.n_players
        self._reveal(state)

    def _reveal(self, state: DiamantState) -> None:
        tile = state.deck.pop()
        state.path.append(tile)
        if tile > 0:
            k = sum(state.in_cave)
            share = tile // k
            for p in range(self.n_players):
                if state.in_cave[p]:
                    state.pocket[p] += share
            state.path_gems.append(tile - share * k)
        else:
            t = -tile - 1
            state.hazard_seen[t] += 1
            state.path_gems.append(0)
            if state.hazard_seen[t] >= 2:
                for p in range(self.n_players):
                    if state.in_cave[p]:
                        state.pocket[p] = 0
                        state.in_cave[p] = False
                state.hazard_removed[t] += 1
                self._end_round(state)

    def _end_round(self, state: DiamantState) -> None:
        state.round_no += 1
        if state.round_no >= ROUNDS:
            self._finish(state)
        else:
            self._setup_round(state)

    def _finish(self, state: DiamantState) -> None:
        best = max(state.banked)
        top = [p for p in range(self.n_players) if state.banked[p] == best]
        if len(top) == 1:
            results = [Result.LOSS] * self.n_players
            results[top[0]] = Result.WIN
        else:
            results = [Result.TIE if p in top else Result.LOSS
                       for p in range(self.n_players)]
        state.finish(results)

    def compute_legal(self, state: DiamantState) -> list[int]:
        if state.in_cave[state.current_player]:
            return [CONTINUE, LEAVE]
        return [OBSERVE]

    def step(self, state: DiamantState, action: int) -> None:
        p = state.current_player
        state.choices[p] = action
        if p + 1 < self.n_players:
            state.current_player = p + 1
            return
        self._resolve_cycle(state)
        if not state.finished:
            state.current_player = 0

    def _resolve_cycle(self, state: DiamantState) -> None:
        leavers = [p for p in range(self.n_players)
                   if state.in_cave[p] and state.choices[p] == LEAVE]
        state.choices = [None] * self.n_players
        if leavers:
            k = len(leavers)
            for i, gems in enumerate(state.path_gems):
                share = gems // k
                if share:
                    state.path_gems[i] = gems - share * k
                    for p in leavers:
                        state.pocket[p] += share
            for p in leavers:
                state.banked[p] += state.pocket[p]
                state.pocket[p] = 0
                state.in_cave[p] = False
        if not any(state.in_cave):
            self._end_round(state)
        elif state.deck:
            self._reveal(state)
        else:
            self._end_round(state)  # defensive: a bust always comes first

    def adjudicate_cap(self, state: DiamantState) -> None:
        self._finish(state)

    def copy_state(self, state: DiamantState) -> DiamantState:
        c = DiamantState.__new__(DiamantState)
        state.copy_base_into(c)
        c.deck = state.deck.copy()
        c.path = state.path.copy()
        c.path_gems = state.path_gems.copy()
        c.in_cave = state.in_cave.copy()
        c.pocket = state.pocket.copy()
        c.banked = state.banked.copy()
        c.hazard_seen = state.hazard_seen.copy()
        c.hazard_removed = state.hazard_removed.copy()
        c.round_no = state.round_no
        c.choices = state.choices.copy()
        return c

    def payload_fields(self, state: DiamantState) -> dict:
        return {
            "deck": state.deck,
            "path": state.path,
            "path_gems": state.path_gems,
            "in_cave": state.in_cave,
            "pocket": state.pocket,
            "banked": state.banked,
            "hazard_seen": state.hazard_seen,
            "hazard_removed": state.hazard_removed,
            "round_no": state.round_no,
            "choices": [-1 if c is None else c for c in state.choices],
        }

    def build_tree(self) -> ActionTree:
        tb = TreeBuilder()
        explore = tb.category("explore", [tb.leaf("continue"), tb.leaf("return to camp")])
        camp = tb.category("camp", [tb.leaf("observe from camp")])
        return tb.finish(self.game_id, self.n_players, [explore, camp])

    def observation_shape(self) -> tuple[int, ...]:
        return (13,)

    def vectorize(self, state: DiamantState, player: int) -> np.ndarray:
        obs = np.zeros(13, dtype=np.float32)
        for t in range(HAZARD_TYPES):
            obs[t] = state.hazard_seen[t] / 2.0
        obs[5] = sum(1 for x in state.path if x > 0) / 15.0
        obs[6] = (state.path_gems[-1] if state.path_gems else 0) / 17.0
        obs[7] = min(sum(state.path_gems) / 40.0, 1.0)
        obs[8] = min(state.banked[player] / 100.0, 1.0)
        obs[9] = min(state.pocket[player] / 50.0, 1.0)
        obs[10] = sum(state.in_cave) / self.n_players
        obs[11] = 1.0 if state.in_cave[player] else 0.0
        obs[12] = state.round_no / (ROUNDS - 1)
        return obs

    def to_json(self, state: DiamantState, player: int) -> dict:
        tiles = []
        for tile, gems in zip(state.path, state.path_gems):
            if tile > 0:
                tiles.append({"tile": "treasure", "value": tile, "gems_left": gems})
            else:
                tiles.append({"tile": HAZARD_NAMES[-tile - 1], "gems_left": 0})
        return {
            "player": player,
            "round": state.round_no,
            "deck_count": len(state.deck),
            "path": tiles,
            "hazard_seen": list(state.hazard_seen),
            "players": [
                {
                    "in_cave": state.in_cave[p],
                    "pocket": state.pocket[p],
                    "banked": state.banked[p] if p == player else None,
                }
                for p in range(self.n_players)
            ],
            "to_move": None if state.finished else state.current_player,
        }

    def heuristic(self, state: DiamantState, player: int) -> float:
        return min((state.banked[player] + state.pocket[player]) / 150.0, 0.99)
