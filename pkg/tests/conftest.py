import itertools

import numpy as np
import pytest
from hypothesis import strategies as st

from cutforge.graph import Graph


def all_assignments(n: int) -> np.ndarray:
    return np.array(list(itertools.product((1, -1), repeat=n)), dtype=np.int64)


def enumerate_maxcut(g: Graph) -> float:
    """Independent MaxCut oracle: plain itertools enumeration over all 2^n spins."""
    best = 0.0
    for s in itertools.product((1, -1), repeat=g.n):
        best = max(best, sum(w for u, v, w in g.edges if s[u] != s[v]))
    return best


@st.composite
def graphs(draw, min_nodes=1, max_nodes=9, weights=None):
    n = draw(st.integers(min_nodes, max_nodes))
    pairs = [(i, j) for i in range(n) for j in range(i + 1, n)]
    mask = draw(st.lists(st.booleans(), min_size=len(pairs), max_size=len(pairs)))
    if weights is None:
        ws = [1.0] * len(pairs)
    else:
        ws = draw(st.lists(weights, min_size=len(pairs), max_size=len(pairs)))
    return Graph(n, tuple((u, v, w) for (u, v), keep, w in zip(pairs, mask, ws) if keep and w != 0))


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


ACCEPTANCE_LINES: list[str] = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES):
            terminalreporter.write_line(line)
