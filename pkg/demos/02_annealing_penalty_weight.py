"""Simulated annealing on the QUBO, and why the penalty weight matters.

A larger penalty makes every infeasible state expensive, but it also raises
the barrier single-bit moves must cross to trade one PMU for another. Any
weight above 1 already keeps the minimum feasible, so small weights anneal
better.

Run: python demos/02_annealing_penalty_weight.py
"""
import time
from fractions import Fraction

from domino import load_case
from domino.graph import exact_domination_number
from domino.reform import PenaltyConfig, build_bqm
from domino.sa import SaParams, best_feasible, simulated_anneal

for name in ("ieee14", "ieee30"):
    g = load_case(name)
    gamma = exact_domination_number(g)[0]
    print(f"\n{name}: optimum {gamma}")
    for alpha in (Fraction(g.node_count + 1), Fraction(11, 10)):
        bqm = build_bqm(g, PenaltyConfig(alpha, "safe"))
        t = time.perf_counter()
        ss = simulated_anneal(bqm, SaParams(num_reads=100, sweeps_per_read=2000, seed=1))
        hit = best_feasible(g, ss)
        size = hit[1] if hit else "none"
        print(f"  alpha={str(alpha):>5}: best feasible {size}, lowest energy {ss.lowest_energy}, {time.perf_counter() - t:.1f}s")
