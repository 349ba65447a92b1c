"""Engine-wide properties: determinism, legality, copies, turn accounting."""

import pytest

import tabletop_rl as t
from tabletop_rl.rng import Rng
from helpers import ALL_CONFIGS, fuzz_mask_soundness, replay_actions, scripted_hash_trail


@pytest.mark.parametrize("game_id,n", ALL_CONFIGS)
def test_reset_determinism(game_id, n):
    a = t.reset(game_id, n, 12345)
    b = t.reset(game_id, n, 12345)
    assert t.state_hash(a) == t.state_hash(b)
    c = t.reset(game_id, n, 12346)
    assert t.state_hash(a) != t.state_hash(c)


@pytest.mark.parametrize("game_id,n", ALL_CONFIGS)
def test_replay_determinism(game_id, n):
    actions, hashes, final = scripted_hash_trail(game_id, n, seed=777)
    hashes2, final2 = replay_actions(game_id, n, 777, actions)
    assert hashes == hashes2
    assert final.finished == final2.finished
    assert final.results == final2.results


@pytest.mark.parametrize("game_id,n", ALL_CONFIGS)
def test_turn_counter_increments_by_one(game_id, n):
    s = t.reset(game_id, n, 3)
    rng = Rng(3)
    prev = s.turn_counter
    assert prev == 0
    while not s.finished:
        t.apply(s, rng.choice(t.legal_actions(s)))
        assert s.turn_counter == prev + 1
        prev = s.turn_counter


@pytest.mark.parametrize("game_id,n", ALL_CONFIGS)
def test_copy_is_deep_and_preserves_rng(game_id, n):
    s = t.reset(game_id, n, 99)
    rng = Rng(99)
    for _ in range(5):
        if s.finished:
            break
        t.apply(s, rng.choice(t.legal_actions(s)))
    if s.finished:
        c = t.copy_state(s)
        assert c.finished and c.results == s.results
        return
    c = t.copy_state(s)
    h0 = t.state_hash(s)
    assert t.state_hash(c) == h0
    # mutate the copy; original must not move
    t.apply(c, t.legal_actions(c)[0])
    assert t.state_hash(s) == h0
    # identical rng streams: same action sequence gives same hashes
    c2 = t.copy_state(s)
    rng_a, rng_b = Rng(5), Rng(5)
    for _ in range(10):
        if s.finished:
            break
        a = rng_a.choice(t.legal_actions(s))
        b = rng_b.choice(t.legal_actions(c2))
        assert a == b
        t.apply(s, a)
        t.apply(c2, b)
        assert t.state_hash(s) == t.state_hash(c2)


@pytest.mark.parametrize("game_id,n", ALL_CONFIGS)
def test_mask_matches_legal_and_illegal_raises_quick(game_id, n):
    # quick development-scale fuzz; the acceptance suite runs >=10k per game
    assert fuzz_mask_soundness(game_id, n, 500, seed=11) == 500


@pytest.mark.parametrize("game_id,n", ALL_CONFIGS)
def test_progress_under_hard_cap(game_id, n):
    cap = t.make_game(game_id, n).max_decisions
    for seed in range(10):
        s = t.reset(game_id, n, seed)
        rng = Rng(seed)
        while not s.finished:
            t.apply(s, rng.choice(t.legal_actions(s)))
            assert s.turn_counter <= cap
        assert s.results is not None


def test_stratego_draw_at_800_decisions():
    # seed found by search: random play reaches the draw rule
    s = t.reset("Stratego", 2, 68)
    rng = Rng(68)
    while not s.finished:
        t.apply(s, rng.choice(t.legal_actions(s)))
    assert s.turn_counter == 800
    assert s.results == (t.Result.TIE, t.Result.TIE)


def test_unsupported_player_counts():
    with pytest.raises(t.ConfigurationError):
        t.reset("TicTacToe", 3, 0)
    with pytest.raises(t.ConfigurationError):
        t.reset("Diamant", 5, 0)
    with pytest.raises(t.ConfigurationError):
        t.reset("Stratego", 4, 0)
    with pytest.raises(t.ConfigurationError) as e:
        t.reset("NoSuchGame", 2, 0)
    assert "TicTacToe" in str(e.value)


def test_at_most_one_winner():
    for game_id, n in ALL_CONFIGS:
        for seed in range(15):
            s = t.reset(game_id, n, seed)
            rng = Rng(seed)
            while not s.finished:
                t.apply(s, rng.choice(t.legal_actions(s)))
            wins = sum(1 for r in s.results if r is t.Result.WIN)
            assert wins <= 1
            if any(r is t.Result.WIN for r in s.results):
                assert all(r is not t.Result.TIE for r in s.results)
