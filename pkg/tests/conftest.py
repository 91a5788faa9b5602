import numpy as np
import pytest
from hypothesis import strategies as st

from cvtele.fock_core import DensityMatrix


def random_density(seed: int, n_max: int = 15, rank: int = 3, support: int = 6) -> DensityMatrix:
    """Random mixed state supported on the lowest ``support`` Fock levels."""
    rng = np.random.default_rng(seed)
    g = rng.normal(size=(support, rank)) + 1j * rng.normal(size=(support, rank))
    r = np.zeros((n_max + 1, n_max + 1), dtype=complex)
    r[:support, :support] = g @ g.conj().T
    return DensityMatrix(r / np.trace(r).real)


seeds = st.integers(min_value=0, max_value=2**31 - 1)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)
