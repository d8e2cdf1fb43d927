"""Tug-of-war game core: configuration, state, actions, and the simulator."""

from .actions import (
    action_from_row,
    check_legal,
    legal_action_rows,
    legal_actions,
)
from .config import (
    BANELING,
    BOTTOM,
    ENEMY,
    FRIENDLY,
    GRID_CELLS,
    GameConfig,
    IMMORTAL,
    LANES,
    MARINE,
    PLAYERS,
    SCHEMA_MAX_HEALTH,
    SCHEMA_MAX_WAVES,
    TOP,
    UNIT_TYPES,
    ConfigError,
    default_config,
    load_config,
    save_config,
    small_config,
)
from .simulator import (
    BatchState,
    NO_OUTCOME,
    TIMEOUT_CODE,
    action_rows,
    build_outcome,
    simulate_wave,
    simulate_wave_batch,
    stack_states,
    unstack_states,
)
from .state import (
    EMPTY_ACTION,
    NUM_STATE_ATTRIBUTES,
    STATE_ATTRIBUTES,
    AbstractState,
    LegalityError,
    Outcome,
    PurchaseAction,
    TIMEOUT_CONDITION,
    WIN_CONDITIONS,
    flip_condition,
    flip_lanes,
    flip_lanes_action,
    initial_state,
    is_terminal,
    reverse_condition,
    reverse_players,
    reverse_players_actions,
    row_to_state,
    state_to_row,
)

__all__ = [name for name in dir() if not name.startswith("_")]
