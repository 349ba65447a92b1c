"""PPO update behavior: ratio identity, masked entropy, smoke training."""

import numpy as np
import pytest

from tabletop_rl.nn import Adam, PolicyValueNet
from tabletop_rl.ppo import (
    NonFiniteLossError,
    PPOConfig,
    RolloutBuffer,
    masked_log_probs,
    policy_forward,
    ppo_loss_and_grads,
    ppo_update,
    sample_masked,
    train,
)


def random_buffer(net, rng, horizon=8, n_envs=4):
    n_actions = net.n_actions
    buf = RolloutBuffer.allocate(horizon, n_envs, net.obs_shape, n_actions)
    buf.obs[:] = rng.normal(size=buf.obs.shape).astype(np.float32)
    masks = rng.random(size=buf.masks.shape) < 0.6
    masks[..., 0] |= ~masks.any(axis=-1)
    buf.masks[:] = masks
    for step in range(horizon):
        logits, values = net.forward(buf.obs[step])
        logp = masked_log_probs(logits, buf.masks[step])
        probs = np.exp(logp) * buf.masks[step]
        acts = sample_masked(probs, rng.random(n_envs), buf.masks[step])
        buf.actions[step] = acts
        buf.logps[step] = logp[np.arange(n_envs), acts]
        buf.values[step] = values
    buf.dones[:] = rng.random(size=buf.dones.shape) < 0.2
    buf.rewards[:] = buf.dones * rng.choice([-1.0, 0.0, 1.0],
                                            size=buf.rewards.shape)
    return buf


def test_first_epoch_ratio_is_one():
    rng = np.random.default_rng(0)
    net = PolicyValueNet((6,), 5, seed=1)
    net.params["pi_w"] = rng.normal(size=net.params["pi_w"].shape).astype(
        np.float32) * 0.5
    buf = random_buffer(net, rng)
    flat = buf.rewards.size
    cfg = PPOConfig()
    _, stats = ppo_loss_and_grads(
        net,
        buf.obs.reshape((flat,) + net.obs_shape),
        buf.masks.reshape(flat, -1),
        buf.actions.reshape(flat),
        buf.logps.reshape(flat),
        rng.normal(size=flat),
        rng.normal(size=flat),
        buf.values.reshape(flat),
        cfg,
    )
    # same parameters that collected the buffer: importance ratio is 1 for
    # every sample (up to float32 reduction order), so clipping is inactive
    assert stats["ratio_max_abs_dev"] < 1e-5
    assert stats["clip_frac"] == 0.0
    assert abs(stats["approx_kl"]) < 1e-10


def test_entropy_zero_with_single_legal_action():
    net = PolicyValueNet((4,), 6, seed=2)
    rng = np.random.default_rng(3)
    obs = rng.normal(size=(5, 4)).astype(np.float32)
    masks = np.zeros((5, 6), dtype=bool)
    masks[:, 2] = True
    logits, _ = net.forward(obs)
    logp = masked_log_probs(logits, masks)
    probs = np.exp(logp) * masks
    np.testing.assert_array_equal(probs[:, 2], np.ones(5))
    entropy = -(np.where(masks, probs * logp, 0.0)).sum(axis=-1)
    np.testing.assert_array_equal(entropy, np.zeros(5))
    _, stats = ppo_loss_and_grads(
        net, obs, masks, np.full(5, 2), logp[:, 2], np.ones(5),
        np.zeros(5), np.zeros(5), PPOConfig())
    assert stats["entropy"] == 0.0


def test_policy_forward_masked_probabilities():
    net = PolicyValueNet((9,), 9, seed=4)
    obs = np.zeros(9, dtype=np.float32)
    mask = np.ones(9, dtype=bool)
    probs, value = policy_forward(net, obs, mask)
    # zero-initialized policy head: exactly uniform over legal actions
    np.testing.assert_allclose(probs, np.full(9, 1 / 9), atol=1e-12)
    assert isinstance(value, float)
    mask[3:] = False
    probs2, _ = policy_forward(net, obs, mask)
    assert probs2[3:].sum() == 0.0
    np.testing.assert_allclose(probs2[:3].sum(), 1.0, atol=1e-9)


def test_update_moves_policy_toward_rewarded_action():
    # two-armed bandit: action 0 always rewarded, action 1 always punished
    rng = np.random.default_rng(5)
    net = PolicyValueNet((3,), 2, seed=6)
    opt = Adam(net.params, lr=5e-3)
    cfg = PPOConfig(epochs=4, minibatches=1, ent_coef=0.0, anneal_lr=False)
    obs_const = np.ones((4, 8, 3), dtype=np.float32)
    for _ in range(30):
        buf = RolloutBuffer.allocate(4, 8, (3,), 2)
        buf.obs[:] = obs_const
        buf.masks[:] = True
        for step in range(4):
            logits, values = net.forward(buf.obs[step])
            logp = masked_log_probs(logits, buf.masks[step])
            probs = np.exp(logp) * buf.masks[step]
            acts = sample_masked(probs, rng.random(8), buf.masks[step])
            buf.actions[step] = acts
            buf.logps[step] = logp[np.arange(8), acts]
            buf.values[step] = values
            buf.rewards[step] = np.where(acts == 0, 1.0, -1.0)
            buf.dones[step] = 1.0
        ppo_update(net, opt, buf, np.zeros(8, np.float32), cfg,
                   np.random.default_rng(7))
    logits, _ = net.forward(np.ones(3, dtype=np.float32))
    probs = np.exp(masked_log_probs(logits, np.ones(2, dtype=bool)))
    assert probs[0] > 0.9


def test_non_finite_loss_aborts_with_diagnostics():
    net = PolicyValueNet((3,), 4, seed=8)
    obs = np.zeros((2, 3), dtype=np.float32)
    masks = np.ones((2, 4), dtype=bool)
    with pytest.raises(NonFiniteLossError) as err:
        ppo_loss_and_grads(
            net, obs, masks, np.array([0, 1]), np.array([-1e9, -1e9]),
            np.ones(2), np.zeros(2), np.zeros(2), PPOConfig())
    assert "max_ratio" in err.value.diagnostics


def test_sample_masked_never_returns_masked():
    rng = np.random.default_rng(9)
    probs = np.array([[0.5, 0.0, 0.5], [0.0, 1.0, 0.0]])
    masks = np.array([[True, False, True], [False, True, False]])
    for _ in range(200):
        acts = sample_masked(probs, rng.random(2), masks)
        assert masks[0, acts[0]] and masks[1, acts[1]]
    # boundary u exactly on an empty interval still lands on a legal action
    acts = sample_masked(probs, np.array([0.5, 0.0]), masks)
    assert masks[0, acts[0]] and masks[1, acts[1]]


def test_ppo_config_validation():
    with pytest.raises(ValueError):
        PPOConfig(gamma=1.5)
    with pytest.raises(ValueError):
        PPOConfig(clip_coef=0.0)
    with pytest.raises(ValueError):
        PPOConfig(n_envs=0)


@pytest.mark.parametrize("game_id", ["Diamant", "LoveLetter"])
def test_train_smoke_all_metrics_finite(game_id):
    cfg = PPOConfig(total_steps=2048)
    net, history, final = train(game_id, 2, "random", cfg, seed=3,
                                log_every=1)
    assert history
    for row in history:
        for key, value in row.items():
            if isinstance(value, float):
                assert np.isfinite(value), (key, value)
        assert row["env_errors"] == 0
    assert final is not None


def test_train_checkpoint_roundtrip(tmp_path):
    saved = {}

    def on_checkpoint(net, step):
        path = tmp_path / f"ck_{step}.npz"
        net.save(path, extra={"step": step})
        saved[step] = path

    cfg = PPOConfig(total_steps=2048)
    net, _, _ = train("TicTacToe", 2, "random", cfg, seed=4,
                      on_checkpoint=on_checkpoint)
    assert saved
    last = saved[max(saved)]
    loaded, extra = PolicyValueNet.load(last)
    x = np.random.default_rng(1).normal(size=(3, 9)).astype(np.float32)
    la, va = net.forward(x)
    lb, vb = loaded.forward(x)
    np.testing.assert_array_equal(la, lb)
    np.testing.assert_array_equal(va, vb)
