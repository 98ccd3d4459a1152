import numpy as np
import pytest
from hypothesis import HealthCheck, settings
from hypothesis import strategies as st

from harmonic_match.permutations import Permutation

settings.register_profile(
    "default", deadline=None, max_examples=40, suppress_health_check=[HealthCheck.too_slow]
)
settings.load_profile("default")


@st.composite
def permutations(draw, n=None, min_n=1, max_n=6):
    """Hypothesis strategy for a Permutation of a drawn (or fixed) degree."""
    if n is None:
        n = draw(st.integers(min_n, max_n))
    return Permutation(draw(st.permutations(range(1, n + 1))))


def random_symmetric(n, rng):
    """Symmetric matrix with zero diagonal."""
    upper = np.triu(rng.normal(size=(n, n)), k=1)
    return upper + upper.T


@pytest.fixture
def rng():
    return np.random.default_rng(12345)
