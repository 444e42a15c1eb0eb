import itertools
import random
from fractions import Fraction

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from domino.chimera import (
    ChimeraSpec,
    Embedding,
    build_chimera,
    chain_strength,
    clique_bound,
    embed_ising,
    find_embedding,
    interaction_graph,
    unembed,
    verify_embedding,
)
from domino.graph import load_case
from domino.reform import Bqm, IsingModel, PenaltyConfig, build_bqm, to_ising

SMALL = build_chimera(ChimeraSpec(4, 4, 4))


def clique(n):
    return n, list(itertools.combinations(range(n), 2))


@pytest.mark.parametrize(
    "spec,qubits,edges",
    [((16, 16, 4), 2048, 6016), ((1, 1, 4), 8, 16), ((2, 1, 4), 16, 36), ((1, 2, 4), 16, 36)],
)
def test_hardware_counts(spec, qubits, edges):
    hw = build_chimera(ChimeraSpec(*spec))
    assert hw.num_qubits == qubits
    assert len(hw.edges) == edges


def test_two_row_chip_adds_four_vertical_couplers():
    # two K_{4,4} cells stacked vertically: 16 + 16 intra-cell plus 4 inter-cell
    hw = build_chimera(ChimeraSpec(2, 1, 4))
    spec = hw.spec
    inter = [(a, b) for a, b in hw.edges if spec.coordinates(a)[:2] != spec.coordinates(b)[:2]]
    assert len(inter) == 4
    assert all(spec.coordinates(a)[2] == 0 and spec.coordinates(a)[3] == spec.coordinates(b)[3] for a, b in inter)


def test_coordinates_round_trip():
    spec = ChimeraSpec(3, 5, 2)
    for q in range(spec.num_qubits):
        assert spec.linear_index(*spec.coordinates(q)) == q


def test_bad_spec():
    with pytest.raises(ValueError):
        ChimeraSpec(0, 1, 4)


@pytest.mark.parametrize("spec,bound", [((16, 16, 4), (65, 2080)), ((1, 1, 4), (5, 10)), ((4, 2, 3), (7, 21))])
def test_clique_bound(spec, bound):
    assert clique_bound(ChimeraSpec(*spec)) == bound


def test_ieee300_is_rejected():
    n, edges = interaction_graph(build_bqm(load_case("ieee300")))
    assert len(edges) == 3478 > clique_bound()[1]
    assert find_embedding((n, edges), build_chimera()) is None


def test_k3_in_one_cell():
    e = find_embedding(clique(3), build_chimera(ChimeraSpec(1, 1, 4)), seed=0)
    assert e is not None and e.num_qubits <= 4
    assert verify_embedding(clique(3), build_chimera(ChimeraSpec(1, 1, 4)), e)[0]


def test_ieee9_embeds_within_bound():
    b = build_bqm(load_case("ieee9"))
    hw = build_chimera()
    e = find_embedding(b, hw, seed=0, tries=10)
    assert e is not None
    assert verify_embedding(b, hw, e)[0]
    assert e.num_qubits <= 98
    assert e.info["min_qubits"] == e.num_qubits == min(q for q in e.info["per_try_qubits"] if q)


def test_embedding_deterministic():
    a = find_embedding(clique(7), SMALL, seed=4, tries=3)
    b = find_embedding(clique(7), SMALL, seed=4, tries=3)
    assert a.chains == b.chains


@pytest.mark.parametrize("m,l", [(1, 4), (2, 2), (2, 4), (3, 3), (4, 1)])
def test_cliques_up_to_the_bound(m, l):
    hw = build_chimera(ChimeraSpec(m, m, l))
    n_max, _ = clique_bound(hw.spec)
    for n in range(2, n_max + 1):
        e = find_embedding(clique(n), hw, seed=0)
        assert e is not None, n
        assert verify_embedding(clique(n), hw, e)[0]


def test_clique_over_the_bound_is_rejected():
    hw = build_chimera(ChimeraSpec(2, 2, 2))
    assert find_embedding(clique(6), hw) is None


def test_verify_reports_violations():
    hw = build_chimera(ChimeraSpec(1, 1, 4))
    logical = (2, [(0, 1)])
    assert verify_embedding(logical, hw, Embedding({0: (0,), 1: (4,)})) == (True, [])
    ok, msgs = verify_embedding(logical, hw, Embedding({0: (0, 1), 1: (4,)}))
    assert not ok and any("disconnected chain" in m for m in msgs)
    ok, msgs = verify_embedding(logical, hw, Embedding({0: (0, 4), 1: (4,)}))
    assert not ok and any("overlap" in m for m in msgs)
    ok, msgs = verify_embedding(logical, hw, Embedding({0: (0,), 1: (1,)}))
    assert not ok and any("missing coupler" in m for m in msgs)
    ok, msgs = verify_embedding(logical, hw, Embedding({0: (0,)}))
    assert not ok and any("empty chain" in m for m in msgs)
    ok, msgs = verify_embedding(logical, hw, Embedding({0: (0,), 1: (99,)}))
    assert not ok and any("invalid qubit" in m for m in msgs)


def test_embedding_json_round_trip():
    e = find_embedding(clique(5), SMALL, seed=1, tries=2)
    back = Embedding.from_json(e.to_json())
    assert back.chains == e.chains


@pytest.mark.parametrize("name,factor,expected", [("ieee14", Fraction(3, 2), 12), ("ieee9", Fraction(3, 2), 3), ("ieee118", 1, 32)])
def test_chain_strength(name, factor, expected):
    assert chain_strength(to_ising(build_bqm(load_case(name))), factor) == expected


def test_split_field_and_scale():
    hw = build_chimera(ChimeraSpec(1, 1, 4))
    m = IsingModel(("a",), (Fraction(1),), {})
    p = embed_ising(m, Embedding({0: (0, 4)}), Fraction(3, 2), hw)
    assert p.scale == Fraction(2, 3)
    assert p.model.h == (Fraction(1, 3), Fraction(1, 3))
    assert list(p.model.J.values()) == [-1]
    assert p.chain_constant == Fraction(-3, 2)


def test_large_field_forces_scale():
    hw = build_chimera(ChimeraSpec(1, 1, 4))
    m = IsingModel(("a",), (Fraction(56),), {})
    p = embed_ising(m, Embedding({0: (0,)}), 1, hw)
    assert p.scale <= Fraction(2, 56)


def test_in_range_model_is_unchanged():
    hw = build_chimera(ChimeraSpec(1, 1, 4))
    m = IsingModel(("a", "b"), (Fraction(1, 2), Fraction(-1)), {(0, 1): Fraction(1, 2)}, Fraction(3))
    p = embed_ising(m, Embedding({0: (0,), 1: (4,)}), 1, hw)
    assert p.scale == 1
    assert p.model.h == m.h and list(p.model.J.values()) == [Fraction(1, 2)] and p.model.offset == 3


def test_extended_negative_range():
    hw = build_chimera(ChimeraSpec(1, 1, 4))
    m = IsingModel(("a",), (Fraction(0),), {})
    p = embed_ising(m, Embedding({0: (0, 4)}), 2, hw, j_range=(-2, 1))
    assert p.scale == 1


def test_embed_rejects_invalid_embedding():
    hw = build_chimera(ChimeraSpec(1, 1, 4))
    m = IsingModel(("a", "b"), (Fraction(0), Fraction(0)), {(0, 1): Fraction(1)})
    with pytest.raises(ValueError):
        embed_ising(m, Embedding({0: (0,), 1: (1,)}), 1, hw)


def test_unembed_majority_and_ties():
    e = Embedding({0: (0, 1, 2), 1: (3,), 2: (4, 5)})
    logical, broken = unembed({0: 1, 1: 1, 2: -1, 3: -1, 4: -1, 5: 1}, e)
    assert logical == {0: 1, 1: -1, 2: -1}
    assert broken == Fraction(2, 3)
    assert unembed([1, 1, 1, -1, 1, 1], e) == ({0: 1, 1: -1, 2: 1}, 0)


def _random_ising(n, rng):
    h = tuple(Fraction(rng.randint(-6, 6), rng.randint(1, 3)) for _ in range(n))
    J = {(u, v): Fraction(rng.randint(-4, 4) or 1, rng.randint(1, 2)) for u, v in itertools.combinations(range(n), 2) if rng.random() < 0.7}
    return IsingModel(tuple(range(n)), h, J, Fraction(rng.randint(-3, 3)))


@settings(max_examples=15, deadline=None)
@given(st.integers(1, 4), st.integers(0, 10**6))
def test_unanimous_chains_preserve_energy(n, seed):
    rng = random.Random(seed)
    m = _random_ising(n, rng)
    hw = build_chimera(ChimeraSpec(2, 2, 4))
    e = find_embedding(m, hw, seed=seed, tries=2)
    assert e is not None
    p = embed_ising(m, e, chain_strength(m) or 1, hw)
    pos = {q: k for k, q in enumerate(p.model.variables)}
    for spins in itertools.product((1, -1), repeat=n):
        phys = [0] * len(pos)
        for v, chain in e.chains.items():
            for q in chain:
                phys[pos[q]] = spins[v]
        assert p.model.energy(phys) == p.scale * (m.energy(spins) + p.chain_constant)
        sample = {q: phys[pos[q]] for q in pos}
        assert unembed(sample, e) == ({v: spins[v] for v in range(n)}, 0)
    assert max(abs(x) for x in p.model.h) <= 2
    assert all(-1 <= x <= 1 for x in p.model.J.values())


@st.composite
def logical_graphs(draw):
    n = draw(st.integers(1, 30))
    pairs = list(itertools.combinations(range(n), 2))
    density = draw(st.floats(0.02, 0.25))
    rng = random.Random(draw(st.integers(0, 10**6)))
    return n, [p for p in pairs if rng.random() < density]


@settings(max_examples=25, deadline=None)
@given(logical_graphs(), st.integers(0, 1000))
def test_every_returned_embedding_verifies(logical, seed):
    e = find_embedding(logical, SMALL, seed=seed, tries=2)
    if e is not None:
        assert verify_embedding(logical, SMALL, e) == (True, [])
