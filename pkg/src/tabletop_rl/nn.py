"""Actor-critic network with hand-written forward/backward passes in numpy.

The architecture is fixed: an optional 3x3 convolution stem (Stratego's
spatial observations), two fully connected tanh layers of width 64, and two
heads producing per-leaf policy logits and a scalar value.  Because the
architecture is closed, backpropagation is written out explicitly instead
of pulling in an autodiff stack; tests verify every gradient against
central finite differences.

Initialization: orthogonal with gain sqrt(2) on the trunk, gain 1 on the
value head, and an all-zero policy head so the initial policy is exactly
uniform over legal actions.
"""

from __future__ import annotations

import json

import numpy as np

CHECKPOINT_VERSION = 1


def orthogonal(rng: np.random.Generator, shape: tuple[int, int], gain: float,
               dtype) -> np.ndarray:
    a = rng.standard_normal(shape)
    q, r = np.linalg.qr(a if shape[0] >= shape[1] else a.T)
    q = q * np.sign(np.diag(r))
    if shape[0] < shape[1]:
        q = q.T
    return np.ascontiguousarray((gain * q[: shape[0], : shape[1]]).astype(dtype))


class PolicyValueNet:
    """Shared trunk, policy head (one logit per action-tree leaf), value head."""

    def __init__(self, obs_shape, n_actions, hidden=(64, 64), conv_channels=32,
                 dtype=np.float32, seed=0):
        self.obs_shape = tuple(obs_shape)
        self.n_actions = int(n_actions)
        self.hidden = tuple(hidden)
        self.dtype = np.dtype(dtype)
        self.conv = len(self.obs_shape) == 3
        self.conv_channels = int(conv_channels) if self.conv else 0
        rng = np.random.default_rng(seed)
        self.params: dict[str, np.ndarray] = {}
        if self.conv:
            c, h, w = self.obs_shape
            fan_in = c * 9
            self.params["conv_w"] = orthogonal(
                rng, (fan_in, self.conv_channels), np.sqrt(2), self.dtype)
            self.params["conv_b"] = np.zeros(self.conv_channels, self.dtype)
            flat = self.conv_channels * (h - 2) * (w - 2)
        else:
            flat = int(np.prod(self.obs_shape))
        sizes = (flat,) + self.hidden
        for i in range(len(self.hidden)):
            self.params[f"fc{i}_w"] = orthogonal(
                rng, (sizes[i], sizes[i + 1]), np.sqrt(2), self.dtype)
            self.params[f"fc{i}_b"] = np.zeros(sizes[i + 1], self.dtype)
        top = sizes[-1]
        self.params["pi_w"] = np.zeros((top, self.n_actions), self.dtype)
        self.params["pi_b"] = np.zeros(self.n_actions, self.dtype)
        self.params["v_w"] = orthogonal(rng, (top, 1), 1.0, self.dtype)
        self.params["v_b"] = np.zeros(1, self.dtype)

    # -- forward ------------------------------------------------------------
    def _im2col(self, x):
        windows = np.lib.stride_tricks.sliding_window_view(x, (3, 3), axis=(2, 3))
        # (B, C, H-2, W-2, 3, 3) -> (B, H-2, W-2, C, 3, 3) -> (B*P, C*9)
        b = x.shape[0]
        col = windows.transpose(0, 2, 3, 1, 4, 5).reshape(b, -1, x.shape[1] * 9)
        return np.ascontiguousarray(col)

    def forward(self, x, need_cache=False):
        x = np.asarray(x, dtype=self.dtype)
        squeeze = x.ndim == len(self.obs_shape)
        if squeeze:
            x = x[None, ...]
        b = x.shape[0]
        cache = {"x": x}
        if self.conv:
            col = self._im2col(x)
            pre = col @ self.params["conv_w"] + self.params["conv_b"]
            act = np.tanh(pre)
            cache["conv_col"] = col
            cache["conv_act"] = act
            h = act.reshape(b, -1)
        else:
            h = x.reshape(b, -1)
        cache["h0"] = h
        for i in range(len(self.hidden)):
            pre = h @ self.params[f"fc{i}_w"] + self.params[f"fc{i}_b"]
            h = np.tanh(pre)
            cache[f"a{i}"] = h
        logits = h @ self.params["pi_w"] + self.params["pi_b"]
        values = (h @ self.params["v_w"] + self.params["v_b"])[:, 0]
        if squeeze:
            logits, values = logits[0], values[0]
        if need_cache:
            return logits, values, cache
        return logits, values

    # -- backward -----------------------------------------------------------
    def backward(self, cache, dlogits, dvalues):
        """Gradients of a scalar loss given d(loss)/d(logits) and /d(values)."""
        grads = {}
        top = cache[f"a{len(self.hidden) - 1}"] if self.hidden else cache["h0"]
        dlogits = np.asarray(dlogits, dtype=self.dtype)
        dvalues = np.asarray(dvalues, dtype=self.dtype)
        grads["pi_w"] = top.T @ dlogits
        grads["pi_b"] = dlogits.sum(axis=0)
        grads["v_w"] = (top.T @ dvalues)[:, None]
        grads["v_b"] = np.array([dvalues.sum()], dtype=self.dtype)
        dh = dlogits @ self.params["pi_w"].T + dvalues[:, None] @ self.params["v_w"].T
        for i in reversed(range(len(self.hidden))):
            act = cache[f"a{i}"]
            dpre = dh * (1.0 - act * act)
            below = cache[f"a{i - 1}"] if i > 0 else cache["h0"]
            grads[f"fc{i}_w"] = below.T @ dpre
            grads[f"fc{i}_b"] = dpre.sum(axis=0)
            dh = dpre @ self.params[f"fc{i}_w"].T
        if self.conv:
            b = cache["x"].shape[0]
            act = cache["conv_act"]
            dact = dh.reshape(act.shape)
            dpre = dact * (1.0 - act * act)
            col = cache["conv_col"]
            flatp = dpre.reshape(-1, self.conv_channels)
            grads["conv_w"] = col.reshape(-1, col.shape[-1]).T @ flatp
            grads["conv_b"] = flatp.sum(axis=0)
            dcol = dpre @ self.params["conv_w"].T  # (B, P, C*9)
            c, hgt, wid = self.obs_shape
            dx = np.zeros((b, c, hgt, wid), dtype=self.dtype)
            dcol = dcol.reshape(b, hgt - 2, wid - 2, c, 3, 3)
            for i in range(3):
                for j in range(3):
                    dx[:, :, i:i + hgt - 2, j:j + wid - 2] += (
                        dcol[:, :, :, :, i, j].transpose(0, 3, 1, 2))
            grads["_input"] = dx
        return grads

    # -- persistence ----------------------------------------------------------
    def meta(self) -> dict:
        return {
            "version": CHECKPOINT_VERSION,
            "obs_shape": list(self.obs_shape),
            "n_actions": self.n_actions,
            "hidden": list(self.hidden),
            "conv_channels": self.conv_channels,
            "dtype": self.dtype.name,
        }

    def save(self, path, extra: dict | None = None) -> None:
        meta = self.meta()
        meta["extra"] = extra or {}
        arrays = dict(self.params)
        arrays["__meta__"] = np.frombuffer(
            json.dumps(meta).encode(), dtype=np.uint8)
        np.savez(path, **arrays)

    @classmethod
    def load(cls, path):
        with np.load(path) as data:
            meta = json.loads(bytes(data["__meta__"]).decode())
            if meta["version"] != CHECKPOINT_VERSION:
                raise ValueError(f"unsupported checkpoint version {meta['version']}")
            net = cls(
                obs_shape=tuple(meta["obs_shape"]),
                n_actions=meta["n_actions"],
                hidden=tuple(meta["hidden"]),
                conv_channels=meta["conv_channels"] or 32,
                dtype=np.dtype(meta["dtype"]),
            )
            for name in net.params:
                net.params[name] = data[name].astype(net.dtype)
        return net, meta["extra"]


class Adam:
    """Adam with bias correction; eps matches the reference PPO setup."""

    def __init__(self, params: dict[str, np.ndarray], lr: float, eps: float = 1e-5,
                 betas=(0.9, 0.999)):
        self.params = params
        self.lr = lr
        self.eps = eps
        self.b1, self.b2 = betas
        self.t = 0
        self.m = {k: np.zeros_like(v) for k, v in params.items()}
        self.v = {k: np.zeros_like(v) for k, v in params.items()}

    def step(self, grads: dict[str, np.ndarray], lr: float | None = None) -> None:
        lr = self.lr if lr is None else lr
        self.t += 1
        bc1 = 1.0 - self.b1 ** self.t
        bc2 = 1.0 - self.b2 ** self.t
        for k, p in self.params.items():
            g = grads[k]
            m = self.m[k]
            v = self.v[k]
            m *= self.b1
            m += (1 - self.b1) * g
            v *= self.b2
            v += (1 - self.b2) * (g * g)
            p -= lr * (m / bc1) / (np.sqrt(v / bc2) + self.eps)


def clip_grad_norm(grads: dict[str, np.ndarray], max_norm: float) -> float:
    """Scale gradients in place to a global L2 norm cap; returns the norm."""
    total = 0.0
    for k, g in grads.items():
        if k == "_input":
            continue
        total += float((g.astype(np.float64) ** 2).sum())
    norm = float(np.sqrt(total))
    if norm > max_norm and norm > 0:
        scale = max_norm / norm
        for k, g in grads.items():
            if k != "_input":
                g *= scale
    return norm
