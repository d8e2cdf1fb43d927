from __future__ import annotations

import numpy as np
import pytest

from towbench.game import (
    GRID_CELLS,
    AbstractState,
    default_config,
    small_config,
)


@pytest.fixture(scope="session")
def cfg():
    """Default deterministic config used by most tests."""
    return default_config(deterministic=True)


@pytest.fixture(scope="session")
def small_cfg():
    return small_config(deterministic=True)


def random_state(rng: np.random.Generator, max_health: int = 2000) -> AbstractState:
    """A structurally valid random state (not necessarily reachable)."""
    return AbstractState(
        health=rng.integers(0, max_health + 1, (2, 2)),
        buildings=rng.integers(0, 5, (2, 2, 3)),
        units=rng.integers(0, 8, (2, 2, 3, GRID_CELLS)),
        currency=rng.integers(0, 600, (2,)),
        wave_index=int(rng.integers(0, 40)),
    )


def random_live_state(rng: np.random.Generator, config) -> AbstractState:
    """Random non-terminal state under ``config``."""
    s = AbstractState(
        health=rng.integers(1, config.base_health + 1, (2, 2)),
        buildings=rng.integers(0, 4, (2, 2, 3)),
        units=rng.integers(0, 6, (2, 2, 3, GRID_CELLS)),
        currency=rng.integers(0, 500, (2,)),
        wave_index=int(rng.integers(0, config.max_waves)),
    )
    return s
