"""Placing the ieee9 model onto a Chimera chip.

Run: python demos/03_chimera_embedding.py
"""
from collections import Counter

from domino import load_case
from domino.chimera import (
    build_chimera,
    chain_strength,
    clique_bound,
    embed_ising,
    find_embedding,
    interaction_graph,
    unembed,
)
from domino.reform import build_bqm, to_ising

hw = build_chimera()
n_max, e_max = clique_bound()
print(f"chip: {hw.num_qubits} qubits, {len(hw.edges)} couplers; any graph with <= {e_max} edges might fit, K{n_max} is the largest clique")

bqm = build_bqm(load_case("ieee9"))
n, edges = interaction_graph(bqm)
print(f"ieee9 model: {n} variables, {len(edges)} interactions")

e = find_embedding(bqm, hw, seed=0, tries=5)
print(f"embedding: {e.num_qubits} qubits, longest chain {e.max_chain_length}")
print("chain length histogram:", dict(sorted(Counter(len(c) for c in e.chains.values()).items())))

ising = to_ising(bqm)
js = chain_strength(ising)
phys = embed_ising(ising, e, js, hw)
print(f"chain coupling {js}; physical model has {len(phys.model.J)} couplings, scaled by {phys.scale}")

# a physical read where every chain agrees maps straight back
logical = [1] * n
sample = {q: logical[v] for v, chain in e.chains.items() for q in chain}
spins, breaks = unembed(sample, e)
print(f"round trip of an all-up read: {breaks} broken chains")
