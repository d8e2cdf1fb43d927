"""Pluggable model suite: exact, flaw-injected, and learned backends."""

from .backends import (
    ExactRanker,
    ExactTransitionModel,
    ExactValueFunction,
    LearnedQRanker,
    LearnedTransitionModel,
    LearnedValueFunction,
    ModelBundle,
    exact_bundle,
    learned_bundle,
    scalar_value,
)
from .features import (
    ACTION_DIM,
    STATE_DIM,
    decode_state,
    decode_state_rows,
    encode_action,
    encode_action_rows,
    encode_state,
    encode_state_rows,
)
from .flaws import (
    FlawSpec,
    asymmetry_noise,
    flawed_bundle,
    health_inflation,
    invert_ranking,
    load_flaw_file,
    parse_flaw_text,
    phantom_units,
    win_prob_leak,
)
from .heuristic import win_probability_rows, win_probability_vector
from .network import Adam, DenseNet, sigmoid
from .weights import load_net, save_net

__all__ = [name for name in dir() if not name.startswith("_")]
