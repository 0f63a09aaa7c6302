from __future__ import annotations

import numpy as np
import pytest
from hypothesis import HealthCheck, settings
from hypothesis import strategies as st

from sureloss.core import GambleSet

settings.register_profile(
    "default", deadline=None, suppress_health_check=[HealthCheck.too_slow], derandomize=True
)
settings.load_profile("default")


def gamble_sets(min_n=1, max_n=6, min_m=2, max_m=6, lo=-2.0, hi=2.0):
    """Small random gamble sets with entries on a coarse grid (exactly representable)."""

    @st.composite
    def build(draw):
        n = draw(st.integers(min_n, max_n))
        m = draw(st.integers(min_m, max_m))
        cells = draw(st.lists(st.integers(int(lo * 8), int(hi * 8)), min_size=n * m, max_size=n * m))
        return GambleSet.from_rows(np.array(cells, dtype=float).reshape(n, m) / 8.0)

    return build()


@pytest.fixture
def two_by_two():
    return {
        "asl": GambleSet.from_rows([(1, -2), (-1, 2)]),
        "sure_loss": GambleSet.from_rows([(1, -2), (-2, 1)]),
    }
