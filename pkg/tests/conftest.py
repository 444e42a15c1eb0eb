import itertools

import pytest
from hypothesis import strategies as st

from domino.graph import Graph, is_dominating


@pytest.fixture
def observed_fixture():
    """Bus 1 sees 2, 3, 6, 7 directly; 4, 5 and 8 hang off the far side."""
    edges = [(1, 2), (1, 3), (1, 6), (1, 7), (3, 4), (4, 5), (6, 8), (7, 8)]
    return Graph.from_edges(8, [(u - 1, v - 1) for u, v in edges])


@pytest.fixture
def p2():
    return Graph.from_edges(2, [(0, 1)], name="p2")


def path(n):
    return Graph.from_edges(n, [(i, i + 1) for i in range(n - 1)])


def star(leaves):
    return Graph.from_edges(leaves + 1, [(0, i) for i in range(1, leaves + 1)])


@st.composite
def graphs(draw, min_nodes=1, max_nodes=8):
    n = draw(st.integers(min_nodes, max_nodes))
    pairs = list(itertools.combinations(range(n), 2))
    chosen = draw(st.lists(st.sampled_from(pairs), unique=True)) if pairs else []
    return Graph.from_edges(n, chosen)


def brute_gamma(g):
    for k in range(1, g.node_count + 1):
        for combo in itertools.combinations(range(g.node_count), k):
            if is_dominating(g, set(combo))[0]:
                return k
    raise AssertionError("the full node set always dominates")
