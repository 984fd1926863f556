import numpy as np
import pytest
from hypothesis import settings

settings.register_profile("phasekit", max_examples=40, deadline=None)
settings.load_profile("phasekit")


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


def random_hermitian(rng, dim):
    a = rng.standard_normal((dim, dim)) + 1j * rng.standard_normal((dim, dim))
    return 0.5 * (a + a.conj().T)


def random_contraction(rng, dim, rank=None):
    """Random ``0 <= A <= I`` with optional rank deficiency."""
    q, _ = np.linalg.qr(rng.standard_normal((dim, dim)) + 1j * rng.standard_normal((dim, dim)))
    w = rng.uniform(0.05, 1.0, dim)
    if rank is not None:
        w[rank:] = 0.0
    return (q * w) @ q.conj().T
