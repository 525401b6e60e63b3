from __future__ import annotations

import numpy as np
import pytest
from hypothesis import settings

from levybreak import IncrementSeries

settings.register_profile("default", max_examples=60, deadline=None)
settings.load_profile("default")


@pytest.fixture
def rng() -> np.random.Generator:
    return np.random.default_rng(20240501)


@pytest.fixture
def toy() -> IncrementSeries:
    """Four increments with mesh 1/4, so k_n = 1 and two increments reach z = 1."""
    return IncrementSeries.from_values([2.0, 0.0, 2.0, 0.0], 0.25)
