import numpy as np
import pytest
from hypothesis import settings

from hilbert_mnc import AlgebraDesc

settings.register_profile("default", max_examples=40, deadline=None)
settings.load_profile("default")

POOL = [(1,), (2,), (1, 1), (2, 1), (3,)]


@pytest.fixture(params=POOL, ids=lambda b: "+".join(f"M{k}" for k in b))
def desc(request):
    return AlgebraDesc(request.param)


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


def dense(a):
    """Block-diagonal dense matrix of an algebra element (independent oracle)."""
    n = sum(b.shape[0] for b in a.blocks)
    out = np.zeros((n, n), dtype=complex)
    i = 0
    for b in a.blocks:
        k = b.shape[0]
        out[i:i + k, i:i + k] = b
        i += k
    return out
