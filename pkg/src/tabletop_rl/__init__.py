"""Multi-game tabletop simulation engine with masked PPO baselines."""

from .core import (
    apply,
    copy_state,
    current_player,
    legal_actions,
    make_game,
    reset,
    state_dict,
    state_hash,
    supported_games,
    terminal_reward,
    ConfigurationError,
    GameError,
    IllegalActionError,
    InvalidMaskError,
    Result,
    ShapeError,
    TerminalStateError,
)
from .actions import build_tree, compute_mask, mask_logits, mask_q_values, masked_softmax
from .rng import Rng, derive_seed

__version__ = "0.1.0"

__all__ = [
    "apply",
    "build_tree",
    "compute_mask",
    "copy_state",
    "current_player",
    "derive_seed",
    "legal_actions",
    "make_game",
    "mask_logits",
    "mask_q_values",
    "masked_softmax",
    "reset",
    "state_dict",
    "state_hash",
    "supported_games",
    "terminal_reward",
    "ConfigurationError",
    "GameError",
    "IllegalActionError",
    "InvalidMaskError",
    "Result",
    "Rng",
    "ShapeError",
    "TerminalStateError",
]
