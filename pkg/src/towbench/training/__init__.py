"""Learning pipeline: decomposed-reward DQN self-play and dynamics fitting."""

from .drdqn import (
    DQNHyperparams,
    TrainingDivergence,
    compute_targets,
    evaluate_vs_pool,
    greedy_action_row,
    run_pool_training,
    train_drdqn,
)
from .dynamics import (
    DynamicsHyperparams,
    collect_dynamics_dataset,
    train_dynamics,
    validation_report,
)
from .pool import AgentPool, PoolMember
from ..records import TransitionRecord, load_records, save_records

__all__ = [name for name in dir() if not name.startswith("_")]
