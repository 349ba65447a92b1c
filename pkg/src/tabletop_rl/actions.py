"""Fixed-shape action trees and per-state legality masks.

A game's complete action space is enumerated once, at initialisation, as a
rooted tree: internal nodes are action categories, leaves are concrete
actions.  The tree shape never changes afterwards; what changes per state is
the boolean mask over the flattened leaves.  Action selection consumes only
the flat leaf vector; the tree structure exists for documentation (the
per-game action atlas) and mask bookkeeping.

Two masking semantics are provided for value- and policy-based selection:

* ``mask_q_values`` sinks unavailable entries to a sentinel below any
  representable legal value, so a plain argmax never picks them.
* ``mask_logits`` sinks unavailable logits to -1e9, which underflows to an
  exact probability of 0.0 after softmax in 32-bit floats.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .core import (
    Game,
    GameState,
    ConfigurationError,
    InvalidMaskError,
    ShapeError,
    legal_actions,
)

LOGIT_SENTINEL = -1e9


@dataclass(frozen=True)
class ActionNode:
    """Tree node; leaves carry their flat index, categories carry children."""

    name: str
    children: tuple["ActionNode", ...] = ()
    leaf_index: int = -1

    @property
    def is_leaf(self) -> bool:
        return not self.children


@dataclass(frozen=True)
class ActionTree:
    """Immutable action-space enumeration for one (game, players) config."""

    game_id: str
    n_players: int
    root: ActionNode
    leaves: tuple[str, ...] = field(default=())

    @property
    def leaf_count(self) -> int:
        return len(self.leaves)

    def label(self, action: int) -> str:
        return self.leaves[action]

    def categories(self) -> list[str]:
        return [c.name for c in self.root.children]


class TreeBuilder:
    """Assigns flat leaf indices in declaration order."""

    def __init__(self):
        self.labels: list[str] = []

    def leaf(self, label: str) -> ActionNode:
        idx = len(self.labels)
        self.labels.append(label)
        return ActionNode(label, leaf_index=idx)

    def category(self, name: str, children) -> ActionNode:
        return ActionNode(name, children=tuple(children))

    def finish(self, game_id: str, n_players: int, root_children) -> ActionTree:
        root = ActionNode("root", children=tuple(root_children))
        return ActionTree(game_id, n_players, root, tuple(self.labels))


def build_tree(game_id: str, n_players: int) -> ActionTree:
    from .core import make_game

    return make_game(game_id, n_players).build_tree()


def compute_mask(tree: ActionTree, state: GameState) -> np.ndarray:
    """Boolean legality vector over the tree's flattened leaves."""
    game: Game = state.game
    if tree.game_id != game.game_id or tree.n_players != game.n_players:
        raise ConfigurationError(
            f"tree built for ({tree.game_id}, {tree.n_players}) cannot mask a "
            f"({game.game_id}, {game.n_players}) state"
        )
    mask = np.zeros(tree.leaf_count, dtype=bool)
    mask[legal_actions(state)] = True
    return mask


def _check_pair(values: np.ndarray, mask: np.ndarray) -> np.ndarray:
    values = np.asarray(values)
    mask = np.asarray(mask)
    if values.shape[-1] != mask.shape[-1] or values.shape != mask.shape:
        raise ShapeError(f"shape mismatch: values {values.shape} vs mask {mask.shape}")
    if not mask.any(axis=-1).all():
        raise InvalidMaskError("mask has no legal action")
    return mask.astype(bool)


def mask_logits(logits: np.ndarray, mask: np.ndarray) -> np.ndarray:
    """Replace unavailable logits so softmax gives them probability 0.0."""
    mask = _check_pair(logits, mask)
    return np.where(mask, logits, np.asarray(LOGIT_SENTINEL, dtype=np.asarray(logits).dtype))


def mask_q_values(q: np.ndarray, mask: np.ndarray) -> np.ndarray:
    """Replace unavailable Q-values with a sentinel no legal value can lose to."""
    mask = _check_pair(q, mask)
    q = np.asarray(q)
    sentinel = np.finfo(q.dtype).min / 2 if np.issubdtype(q.dtype, np.floating) else np.finfo(np.float64).min / 2
    return np.where(mask, q, np.asarray(sentinel, dtype=q.dtype))


def masked_softmax(logits: np.ndarray, mask: np.ndarray) -> np.ndarray:
    """Probabilities over legal actions; exactly 0 on masked-out entries.

    Normalization runs in float64 regardless of the logit dtype so that the
    legal probabilities sum to 1 within 1e-9.
    """
    z = mask_logits(logits, mask).astype(np.float64, copy=False)
    z = z - z.max(axis=-1, keepdims=True)
    p = np.exp(z)
    return p / p.sum(axis=-1, keepdims=True)
