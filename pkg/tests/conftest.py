import numpy as np
import pytest
from hypothesis import strategies as st

from qapfn.instance_io import Instance

# Worked 5x5 example: asymmetric distances, symmetric flows.
EX_D = np.array([[0, 1, 0, 1, 4],
                 [1, 0, 4, 2, 0],
                 [0, 0, 0, 3, 5],
                 [5, 3, 1, 0, 1],
                 [4, 5, 0, 3, 0]], dtype=float)
EX_F = np.array([[0, 2, 1, 3, 4],
                 [2, 0, 3, 2, 2],
                 [1, 3, 0, 7, 0],
                 [3, 2, 7, 0, 3],
                 [4, 2, 0, 3, 0]], dtype=float)
EX_PERM = [2, 0, 1, 3, 4]

SYMMETRY_CLASSES = ("symmetric", "fsym", "dsym", "asym")


def random_instance(rng, n, kind="symmetric", high=10, name="rand"):
    F = rng.integers(0, high, (n, n)).astype(float)
    D = rng.integers(0, high, (n, n)).astype(float)
    if kind in ("symmetric", "fsym"):
        F = np.triu(F, 1) + np.triu(F, 1).T
    if kind in ("symmetric", "dsym"):
        D = np.triu(D, 1) + np.triu(D, 1).T
    np.fill_diagonal(F, 0)
    np.fill_diagonal(D, 0)
    # make sure a requested asymmetric matrix really is asymmetric
    if kind in ("dsym", "asym") and np.array_equal(F, F.T):
        F[0, 1] += 1
    if kind in ("fsym", "asym") and np.array_equal(D, D.T):
        D[0, 1] += 1
    return Instance(name, F, D)


@st.composite
def instances(draw, min_n=2, max_n=6, kinds=SYMMETRY_CLASSES):
    n = draw(st.integers(min_n, max_n))
    kind = draw(st.sampled_from(kinds))
    seed = draw(st.integers(0, 2 ** 32 - 1))
    return random_instance(np.random.default_rng(seed), n, kind)


@st.composite
def permutations(draw, n):
    return np.array(draw(st.permutations(list(range(n)))), dtype=np.int64)


@pytest.fixture
def example_instance():
    return Instance("example", EX_F, EX_D)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)
