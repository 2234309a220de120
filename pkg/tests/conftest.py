import os
import random

import pytest

from approxenum.db import Database
from approxenum.neighborhoods import TypeRegistry
from approxenum import figures


def trial_scale() -> float:
    """Scale factor for statistical trial counts (dev knob, default full)."""
    return float(os.environ.get("APPROXENUM_ACCEPT_SCALE", "1.0"))


def scaled(count: int, floor: int = 10) -> int:
    return max(floor, int(round(count * trial_scale())))


@pytest.fixture
def registry() -> TypeRegistry:
    return TypeRegistry()


@pytest.fixture
def pair_a_db() -> Database:
    return figures.graph_db(8, figures.PAIR_A_EDGES)


@pytest.fixture
def pair_b_db() -> Database:
    return figures.graph_db(8, figures.PAIR_B_EDGES)


@pytest.fixture
def rng() -> random.Random:
    return random.Random(20240817)
