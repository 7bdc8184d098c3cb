import math

import numpy as np
import pytest
from hypothesis import settings

settings.register_profile("ci", max_examples=100, derandomize=True, deadline=None)
settings.load_profile("ci")


@pytest.fixture
def grid2d():
    """200 x 200 midpoint grid over [-6, 6]^2: (points, cell area)."""
    n = 200
    h = 12.0 / n
    axis = -6.0 + h * (np.arange(n) + 0.5)
    X, P = np.meshgrid(axis, axis, indexing="ij")
    return np.stack([X, P], axis=-1), h * h


T04 = math.sqrt(1 - 0.4**2)
