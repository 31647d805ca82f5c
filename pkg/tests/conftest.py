import numpy as np
import pytest
from hypothesis import settings

from qsphere.tableaux import rows_to_array

settings.register_profile("default", max_examples=60, deadline=None)
settings.load_profile("default")


def random_rows(ell, rng, top_max=6):
    """Random valid GT pattern: decreasing top row ending in 0, then random interlacing rows."""
    top = sorted(rng.integers(0, top_max + 1, size=ell).tolist(), reverse=True) + [0]
    rows = [tuple(top)]
    while len(rows[-1]) > 1:
        prev = rows[-1]
        rows.append(tuple(int(rng.integers(prev[b + 1], prev[b] + 1)) for b in range(len(prev) - 1)))
    return tuple(rows)


def random_batch(ell, n, rng, top_max=6):
    return np.stack([rows_to_array(random_rows(ell, rng, top_max)) for _ in range(n)])


@pytest.fixture
def rng():
    return np.random.default_rng(20240607)
