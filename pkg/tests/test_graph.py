import io

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from domino.graph import (
    CASES,
    EmptyInputError,
    Graph,
    InexactError,
    ParseError,
    exact_domination_number,
    greedy_dominating,
    is_dominating,
    load_case,
    observability_matrix,
    parse_edge_list,
)

from conftest import brute_gamma, graphs, path, star

BUS_BRANCH = {
    "ieee9": (9, 9),
    "ieee14": (14, 20),
    "ieee24": (24, 34),
    "ieee30": (30, 41),
    "ieee39": (39, 46),
    "ieee57": (57, 78),
    "ieee118": (118, 179),
    "ieee300": (300, 409),
}


def test_parse_path():
    g = parse_edge_list("1 2\n2 3")
    assert g.node_count == 3
    assert g.edges == {(0, 1), (1, 2)}


def test_parse_drops_loops_and_merges_duplicates():
    g = parse_edge_list("1 1\n1 2\n1 2")
    assert (g.node_count, len(g.edges)) == (2, 1)
    assert g.dropped_self_loops == 1
    assert g.merged_duplicates == 1


def test_parse_reversed_duplicate_is_merged():
    assert parse_edge_list("2 1\n1 2\n").merged_duplicates == 1


def test_parse_header_comments_and_stream():
    text = "# three buses, one isolated\nnodes 3\n1 2   # a line\n\n"
    g = parse_edge_list(io.StringIO(text))
    assert g.node_count == 3
    assert g.degrees == (1, 1, 0)


@pytest.mark.parametrize(
    "text,lineno",
    [("1 2\n2\n", 2), ("1 x\n", 1), ("0 1\n", 1), ("1 2 3\n", 1), ("nodes\n", 1)],
)
def test_parse_errors_carry_line_numbers(text, lineno):
    with pytest.raises(ParseError) as err:
        parse_edge_list(text)
    assert err.value.lineno == lineno
    assert f"line {lineno}" in str(err.value)


def test_parse_id_beyond_header():
    with pytest.raises(ParseError):
        parse_edge_list("nodes 2\n1 3\n")


@pytest.mark.parametrize("text", ["", "# nothing\n\n", "nodes 0\n"])
def test_parse_empty(text):
    with pytest.raises(EmptyInputError):
        parse_edge_list(text)


@pytest.mark.parametrize("name", CASES)
def test_bundled_bus_and_branch_counts(name):
    g = load_case(name)
    assert (g.node_count, len(g.edges)) == BUS_BRANCH[name]
    assert g.name == name


def test_unknown_case():
    with pytest.raises(KeyError):
        load_case("ieee10")


def test_edge_list_round_trip():
    g = load_case("ieee30")
    assert parse_edge_list(g.to_edge_list()) == g


def test_observed_fixture(observed_fixture):
    ok, uncovered = is_dominating(observed_fixture, {0})
    assert not ok
    assert uncovered == {3, 4, 7}


def test_star_center_dominates():
    assert is_dominating(star(4), {0}) == (True, frozenset())


def test_empty_set_on_path():
    assert is_dominating(path(3), set()) == (False, frozenset({0, 1, 2}))


def test_is_dominating_bit_vector_and_range():
    assert is_dominating(path(3), [0, 1, 0])[0]
    with pytest.raises(ValueError):
        is_dominating(path(3), {5})


def test_greedy_examples():
    assert greedy_dominating(star(4)) == {0}
    assert len(greedy_dominating(path(4))) == 2
    assert len(greedy_dominating(load_case("ieee9"))) >= 3


@pytest.mark.parametrize("name,gamma", [("ieee9", 3), ("ieee14", 4)])
def test_exact_small_systems(name, gamma):
    g = load_case(name)
    k, witness = exact_domination_number(g)
    assert k == gamma == len(witness)
    assert is_dominating(g, witness)[0]


def test_exact_single_node():
    assert exact_domination_number(Graph(1, frozenset())) == (1, frozenset({0}))


def test_exact_guard_and_budget():
    with pytest.raises(InexactError):
        exact_domination_number(load_case("ieee57"))
    with pytest.raises(InexactError):
        exact_domination_number(load_case("ieee24"), node_budget_limit=3)


def test_observability_matrix_is_adjacency_plus_identity():
    g = load_case("ieee14")
    a = observability_matrix(g)
    adj = np.zeros((14, 14), dtype=np.int64)
    for u, v in g.edges:
        adj[u, v] = adj[v, u] = 1
    assert (a.dense() == adj + np.eye(14, dtype=np.int64)).all()
    assert all(len(r) == d + 1 for r, d in zip(a.rows, g.degrees))
    assert a.rhs == (1,) * 14


def test_observability_rhs_length():
    with pytest.raises(ValueError):
        observability_matrix(path(3), rhs=[1, 1])


@given(graphs())
def test_structural_invariants(g):
    assert sum(g.degrees) == 2 * len(g.edges)
    for i, nbrs in enumerate(g.adjacency):
        assert i not in nbrs
        assert all(i in g.adjacency[j] for j in nbrs)


@given(graphs())
def test_greedy_dominates_and_bounds_exact(g):
    greedy = greedy_dominating(g)
    assert is_dominating(g, greedy)[0]
    assert exact_domination_number(g)[0] <= len(greedy)


@settings(max_examples=60)
@given(graphs())
def test_exact_matches_brute_force(g):
    k, witness = exact_domination_number(g)
    assert k == brute_gamma(g)
    assert is_dominating(g, witness)[0]


@settings(max_examples=60)
@given(graphs(min_nodes=2), st.data())
def test_adding_an_edge_never_raises_gamma(g, data):
    u = data.draw(st.integers(0, g.node_count - 1))
    v = data.draw(st.integers(0, g.node_count - 1).filter(lambda x: x != u))
    assert exact_domination_number(g.add_edge(u, v))[0] <= exact_domination_number(g)[0]
