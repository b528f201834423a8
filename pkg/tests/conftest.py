import numpy as np
import pytest
from hypothesis import strategies as st

from betafield.graph import Network
from betafield.verify.instances import random_network


@pytest.fixture
def rng():
    return np.random.default_rng(20261016)


@pytest.fixture
def edge():
    return Network.from_weighted_edges(2, [(0, 1, 1.0)])


@pytest.fixture
def triangle():
    return Network.from_weighted_edges(3, [(0, 1, 1.0), (1, 2, 1.0), (0, 2, 1.0)])


@pytest.fixture
def path3():
    return Network.from_weighted_edges(3, [(0, 1, 1.0), (1, 2, 1.0)])


@st.composite
def networks(draw, min_n=1, max_n=6):
    """Random connected weighted networks built from a hypothesis-drawn seed."""
    n = draw(st.integers(min_n, max_n))
    seed = draw(st.integers(0, 2**32 - 1))
    extra = draw(st.floats(0.0, 1.0))
    return random_network(np.random.default_rng(seed), n, extra=extra)
