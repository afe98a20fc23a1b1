import numpy as np
import pytest

from curverec import build_index, synth_corpus


@pytest.fixture(scope="session")
def arcs_corpus():
    return synth_corpus("circular_arcs", 400, seed=11)


@pytest.fixture(scope="session")
def arcs_index(arcs_corpus):
    return build_index(arcs_corpus)


@pytest.fixture(scope="session")
def lines_corpus():
    return synth_corpus("lines", 200, seed=5)


@pytest.fixture(scope="session")
def lines_index(lines_corpus):
    return build_index(lines_corpus)


@pytest.fixture(scope="session")
def walks_corpus():
    return synth_corpus("smoothed_random_walks", 150, seed=23)


@pytest.fixture(scope="session")
def walks_index(walks_corpus):
    return build_index(walks_corpus)


@pytest.fixture
def rng():
    return np.random.default_rng(20240817)
