import numpy as np
import pytest

from dfrelay import SnrTrellis


@pytest.fixture
def small_trellis():
    """Three hops, two relays per stage; the optimal path is (2, 1) with bottleneck 3."""
    return SnrTrellis([2, 7], [[[5, 1], [3, 4]]], [6, 2])


def random_trellis(rng, L, M, rounded=False):
    first = rng.exponential(size=M)
    mids = rng.exponential(size=(L - 2, M, M))
    last = rng.exponential(size=M)
    if rounded:  # coarse values force ties
        first, mids, last = (np.round(a * 2) for a in (first, mids, last))
    return SnrTrellis(first, mids, last)
