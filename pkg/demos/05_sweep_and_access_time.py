"""Sweeping anneal time and read count, then charging for machine time.

For each (tau, k) on a log grid the sampler runs k reads of length tau. The
winner is the smallest PMU count, with ties broken by total anneal time
k * tau. Access time adds a fixed programming cost and a per-read readout.

Run: python demos/05_sweep_and_access_time.py
"""
from fractions import Fraction

from domino import load_case
from domino.bench import SweepGrid, TimingModel, emit_report, make_grid, run_sweep
from domino.reform import PenaltyConfig

full = make_grid()
print("grid points:", full.tau_points)
grid = SweepGrid(full.tau_points[:10], full.k_points[:10])

# one sweep stands in for one microsecond of anneal; programming costs 15 ms
# and each readout 100 us, all in microseconds
timing = TimingModel(t_p=15000, t_r=100)
rows = []
for name in ("ieee9", "ieee14"):
    g = load_case(name)
    rows.append(run_sweep(g, PenaltyConfig(Fraction(11, 10), "safe"), grid, seed=0, timing=timing))

text, _ = emit_report(rows)
print()
print(text)
for r in rows:
    print(f"{r.system}: {r.k_star} reads x {r.tau_star} sweeps; T_A={r.t_a}, T={r.t} us = {float(r.t) / 1000:.3f} ms")
