"""Shared test machinery: playout sampling, mask fuzzing, state surgery."""

from __future__ import annotations

import numpy as np

import tabletop_rl as t
from tabletop_rl.rng import Rng

ALL_CONFIGS = [
    ("TicTacToe", 2),
    ("Diamant", 2),
    ("Diamant", 4),
    ("ExplodingKittens", 2),
    ("ExplodingKittens", 4),
    ("LoveLetter", 2),
    ("LoveLetter", 4),
    ("Stratego", 2),
]

FIVE_GAMES = [("TicTacToe", 2), ("Diamant", 2), ("ExplodingKittens", 2),
              ("LoveLetter", 2), ("Stratego", 2)]


def random_playout_states(game_id, n_players, n_states, seed=0):
    """Yield (state, tree) pairs sampled from fresh random playouts."""
    tree = t.build_tree(game_id, n_players)
    rng = Rng(seed)
    produced = 0
    episode = 0
    while produced < n_states:
        s = t.reset(game_id, n_players, t.derive_seed(seed, episode))
        episode += 1
        while not s.finished and produced < n_states:
            yield s, tree
            produced += 1
            t.apply(s, rng.choice(t.legal_actions(s)))


def fuzz_mask_soundness(game_id, n_players, n_states, seed=0):
    """Check mask == legal set on sampled states; try one masked-out action
    per state and require an IllegalActionError.  Returns states checked."""
    checked = 0
    rng = Rng(t.derive_seed(seed, 0xBAD))
    for s, tree in random_playout_states(game_id, n_players, n_states, seed):
        mask = t.compute_mask(tree, s)
        legal = t.legal_actions(s)
        assert sorted(legal) == legal, "legal_actions must be ascending"
        on = np.flatnonzero(mask)
        assert on.tolist() == legal, (game_id, s.turn_counter)
        off = np.flatnonzero(~mask)
        if len(off):
            bad = int(off[rng.randrange(len(off))])
            probe = t.copy_state(s)
            try:
                t.apply(probe, bad)
            except t.IllegalActionError as e:
                assert e.action == bad
                assert sorted(e.legal) == legal
            else:
                raise AssertionError(
                    f"{game_id}: masked-out action {bad} did not raise")
        checked += 1
    return checked


def scripted_hash_trail(game_id, n_players, seed, max_steps=10_000):
    """Deterministic random playout; returns (actions, hashes per step)."""
    s = t.reset(game_id, n_players, seed)
    rng = Rng(t.derive_seed(seed, 1))
    actions, hashes = [], [t.state_hash(s)]
    while not s.finished and len(actions) < max_steps:
        a = rng.choice(t.legal_actions(s))
        actions.append(a)
        t.apply(s, a)
        hashes.append(t.state_hash(s))
    return actions, hashes, s


def replay_actions(game_id, n_players, seed, actions):
    s = t.reset(game_id, n_players, seed)
    hashes = [t.state_hash(s)]
    for a in actions:
        t.apply(s, a)
        hashes.append(t.state_hash(s))
    return hashes, s


# -- hidden-information surgery ----------------------------------------------
# Each function mutates ONLY information hidden from `player` on a copy and
# returns it (or None when the state has nothing hidden to mutate).

def surgery(state, player, rng):
    game_id = state.game.game_id
    c = t.copy_state(state)
    if game_id == "TicTacToe":
        return None  # perfect information game
    if game_id == "Diamant":
        if len(c.deck) < 2:
            return None
        rng.shuffle(c.deck)
        c.banked = [b + (0 if p == player else 7) for p, b in enumerate(c.banked)]
        for q in range(c.n_players):
            if q != player and c.choices[q] is not None:
                c.choices[q] = 1 - c.choices[q] if c.choices[q] in (0, 1) else c.choices[q]
        return c
    if game_id == "ExplodingKittens":
        if len(c.pile) < 2:
            return None
        rng.shuffle(c.pile)
        for q in range(c.n_players):
            if q == player or not c.alive[q]:
                continue
            held = [x for x in range(13) for _ in range(c.hands[q][x])]
            if not held or not c.pile:
                continue
            # swap one hidden hand card with one hidden pile card
            give = held[rng.randrange(len(held))]
            take_i = rng.randrange(len(c.pile))
            take = c.pile[take_i]
            if take == 0:  # do not move a kitten into a hand
                continue
            c.hands[q][give] -= 1
            c.hands[q][take] += 1
            c.pile[take_i] = give
            break
        return c
    if game_id == "LoveLetter":
        if len(c.deck) < 2:
            return None
        rng.shuffle(c.deck)
        for q in range(c.n_players):
            if q != player and c.alive[q] and c.hands[q] and c.deck:
                i = rng.randrange(len(c.deck))
                c.hands[q][0], c.deck[i] = c.deck[i], c.hands[q][0]
                break
        return c
    if game_id == "Stratego":
        opp = 1 - player
        hidden = [i for i, x in enumerate(c.board)
                  if x != -1 and (x % 24) // 12 == opp and x < 24]
        if len(hidden) < 2:
            return None
        i = hidden[rng.randrange(len(hidden))]
        j = hidden[rng.randrange(len(hidden))]
        c.board[i], c.board[j] = c.board[j], c.board[i]
        return c
    raise AssertionError(game_id)
