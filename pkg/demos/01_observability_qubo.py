"""From a bus/branch list to a QUBO whose minimum is a smallest PMU set.

Run: python demos/01_observability_qubo.py
"""
import itertools
from fractions import Fraction

from domino import load_case
from domino.graph import exact_domination_number, greedy_dominating
from domino.reform import PenaltyConfig, Slack, build_bqm, evaluate, reform_stats, slack_bits

g = load_case("ieee14")
print(f"{g.name}: {g.node_count} buses, {len(g.edges)} branches")

# A PMU at bus i sees i and its neighbours, so each row of the coverage
# constraint counts how many PMUs see bus i.
for i in range(3):
    row = [j + 1 for j in g.closed_neighborhood(i)]
    print(f"bus {i + 1} is observed by a PMU at any of {row}")

print("\nEach row needs a surplus variable, stored in binary:")
for i in range(3):
    d = g.degrees[i]
    print(f"  bus {i + 1}: degree {d}, {slack_bits(d, 1, 'paper')} bits (tight), {slack_bits(d, 1, 'safe')} bits (covers every surplus)")

st = reform_stats(g)
print(f"\nfull model: {st.buses + st.ancillas} variables, {st.interactions} interactions")

gamma, best = exact_domination_number(g)
print(f"branch and bound: {gamma} PMUs suffice, e.g. buses {sorted(b + 1 for b in best)}")
print(f"greedy heuristic uses {len(greedy_dominating(g))}")

# Energy of a decision string, minimised over the surplus bits. Surplus bits
# of different rows never interact, so each row is searched on its own.
cfg = PenaltyConfig(g.node_count + 1, "safe")
bqm = build_bqm(g, cfg)
rows = {}
for k, v in enumerate(bqm.variables):
    if isinstance(v, Slack):
        rows.setdefault(v.i, []).append(k)


def best_energy(chosen):
    z = [1 if i in chosen else 0 for i in range(g.node_count)] + [0] * (len(bqm) - g.node_count)
    for members in rows.values():
        options = []
        for bits in itertools.product((0, 1), repeat=len(members)):
            for k, b in zip(members, bits):
                z[k] = b
            options.append((evaluate(bqm, z), bits))
        for k, b in zip(members, min(options)[1]):
            z[k] = b
    return evaluate(bqm, z)


print(f"\nenergy with the optimal set: {best_energy(best)}")
print(f"energy with one PMU removed: {best_energy(set(list(best)[1:]))} (penalty added)")
print(f"energy with every bus equipped: {best_energy(set(range(g.node_count)))}")
print(f"penalty weight used: {Fraction(cfg.alpha)}")
