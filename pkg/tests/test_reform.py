import itertools
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from domino.graph import CASES, Graph, load_case
from domino.reform import (
    Bqm,
    Decision,
    InfeasibleRowError,
    PenaltyConfig,
    Slack,
    SlackMode,
    build_bqm,
    dumps_model,
    energies,
    evaluate,
    feasible,
    interaction_count,
    loads_model,
    reform_stats,
    slack_bits,
    to_ising,
)

from conftest import graphs

TABLE = {
    "ieee9": (9, 9, 9, 57),
    "ieee14": (14, 20, 21, 150),
    "ieee24": (24, 34, 39, 278),
    "ieee30": (30, 41, 42, 325),
    "ieee39": (39, 46, 49, 337),
    "ieee57": (57, 78, 85, 607),
    "ieee118": (118, 179, 188, 1585),
    "ieee300": (300, 409, 417, 3478),
}


@pytest.mark.parametrize(
    "d,b,mode,bits",
    [
        (4, 1, "paper", 2),
        (1, 1, "paper", 0),
        (1, 1, "safe", 1),
        (0, 1, "paper", 0),
        (0, 1, "safe", 0),
        (2, 1, "paper", 1),
        (3, 1, "safe", 2),
        (7, 1, "paper", 3),
        (7, 1, "safe", 3),
        (8, 1, "paper", 3),
        (8, 1, "safe", 4),
    ],
)
def test_slack_bits(d, b, mode, bits):
    assert slack_bits(d, b, mode) == bits


def test_slack_bits_infeasible_row():
    with pytest.raises(InfeasibleRowError):
        slack_bits(1, 3)


@given(st.integers(0, 200), st.integers(1, 5))
def test_safe_slack_covers_full_surplus_range(d, b):
    if d + 1 - b < 0:
        return
    assert 2 ** slack_bits(d, b, SlackMode.SAFE) - 1 >= d + 1 - b
    assert slack_bits(d, b, SlackMode.PAPER) <= slack_bits(d, b, SlackMode.SAFE)


def test_ieee9_ancilla_total():
    g = load_case("ieee9")
    assert sum(slack_bits(d) for d in g.degrees) == 9


def test_p2_energies(p2):
    # H = x1 + x2 + 2 * 2 * (x1 + x2 - 1)**2, both rows being identical
    b = build_bqm(p2)
    assert len(b) == 2
    assert [evaluate(b, x) for x in [(1, 0), (0, 1), (1, 1), (0, 0)]] == [1, 1, 6, 4]


def test_p2_counts(p2):
    b = build_bqm(p2)
    assert interaction_count(b) == 1
    assert reform_stats(p2).as_tuple() == (2, 1, 0, 1)


def test_isolated_node_forces_a_pmu():
    g = Graph(1, frozenset())
    b = build_bqm(g, PenaltyConfig(alpha=Fraction(5, 2)))
    assert evaluate(b, (0,)) == Fraction(5, 2)
    assert evaluate(b, (1,)) == 1


def test_variable_order():
    b = build_bqm(load_case("ieee9"))
    assert len(b) == 18
    assert all(isinstance(v, Decision) for v in b.variables[:9])
    slacks = b.variables[9:]
    assert all(isinstance(v, Slack) for v in slacks)
    assert list(slacks) == sorted(slacks)
    assert str(Decision(3)) == "x3" and str(Slack(2, 1)) == "y2_1"


@pytest.mark.parametrize("name", CASES)
def test_resource_table(name):
    assert reform_stats(load_case(name)).as_tuple() == TABLE[name]


def test_all_zeros_energy_is_penalty_sum():
    g = load_case("ieee14")
    alphas = [Fraction(k + 1, 3) for k in range(14)]
    b = build_bqm(g, PenaltyConfig(alpha=alphas))
    assert evaluate(b, [0] * len(b)) == sum(alphas)


def test_per_row_alpha_length_checked():
    with pytest.raises(ValueError):
        build_bqm(load_case("ieee9"), PenaltyConfig(alpha=[1, 2]))


@pytest.mark.parametrize("alpha", [0, -1, [1, 0]])
def test_alpha_must_be_positive(alpha):
    with pytest.raises(ValueError):
        PenaltyConfig(alpha=alpha)


def test_evaluate_length_mismatch(p2):
    with pytest.raises(ValueError):
        evaluate(build_bqm(p2), (1,))


def test_bqm_drops_zero_couplings_and_rejects_self_pairs():
    b = Bqm("ab", {"a": 1}, {("a", "b"): 2, ("b", "a"): -2})
    assert b.quadratic == {}
    with pytest.raises(ValueError):
        Bqm("ab", {}, {("a", "a"): 1})
    with pytest.raises(ValueError):
        Bqm("aa")


def test_single_variable_ising():
    m = to_ising(Bqm(["x"], {"x": 1}))
    assert m.h == (Fraction(-1, 2),)
    assert m.offset == Fraction(1, 2)
    assert m.energy([1]) == 0 and m.energy([-1]) == 1


@pytest.mark.parametrize("name,jmax", [("ieee9", 2), ("ieee14", 8), ("ieee57", 8), ("ieee118", 32)])
def test_coupling_maxima(name, jmax):
    assert to_ising(build_bqm(load_case(name))).j_max == jmax


def test_field_maximum_ieee118():
    assert to_ising(build_bqm(load_case("ieee118"))).h_max == 56


def test_feasible_examples(p2, observed_fixture):
    assert feasible(p2, (1, 1))
    x = [0] * 8
    x[0] = 1
    assert not feasible(observed_fixture, x)
    g = load_case("ieee30")
    assert feasible(g, [1] * 30 + [0] * 42)


def test_model_json_round_trip():
    b = build_bqm(load_case("ieee14"), PenaltyConfig(Fraction(7, 3), "safe"))
    text = dumps_model(b)
    assert loads_model(text) == b
    assert dumps_model(loads_model(text)) == text
    m = to_ising(b)
    back = loads_model(dumps_model(m))
    assert back.h == m.h and back.J == m.J and back.offset == m.offset


def test_cancellations_are_flagged():
    # default builds never cancel a structural pair, so counts are purely structural
    for name in CASES:
        assert build_bqm(load_case(name)).info["cancelled_pairs"] == 0


@settings(max_examples=40)
@given(graphs(max_nodes=7), st.sampled_from(["paper", "safe"]), st.fractions(min_value=Fraction(1, 4), max_value=9), st.data())
def test_ising_matches_qubo_exactly(g, mode, alpha, data):
    b = build_bqm(g, PenaltyConfig(alpha, mode))
    m = to_ising(b)
    rng = np.random.default_rng(data.draw(st.integers(0, 2**32 - 1)))
    xs = rng.integers(0, 2, (20, len(b)))
    exact = energies(b, xs)
    assert exact == [evaluate(b, x) for x in xs]
    assert exact == m.energies(1 - 2 * xs)
    assert exact[0] == m.energy(list(1 - 2 * xs[0]))


@settings(max_examples=40)
@given(graphs(max_nodes=8))
def test_interactions_at_least_edges(g):
    assert interaction_count(build_bqm(g)) >= len(g.edges)


def _min_penalty(b, g, x):
    n = g.node_count
    slack = len(b) - n
    return min(evaluate(b, list(x) + list(y)) for y in itertools.product((0, 1), repeat=slack)) - sum(x)


@settings(max_examples=30, deadline=None)
@given(graphs(max_nodes=6), st.fractions(min_value=Fraction(1, 2), max_value=5))
def test_penalty_soundness_small(g, alpha):
    safe = build_bqm(g, PenaltyConfig(alpha, "safe"))
    paper = build_bqm(g, PenaltyConfig(alpha, "paper"))
    for x in itertools.product((0, 1), repeat=g.node_count):
        ok = feasible(g, x)
        assert (_min_penalty(safe, g, x) == 0) == ok
        if not ok:
            assert _min_penalty(paper, g, x) >= alpha
