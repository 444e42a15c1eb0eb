"""Benchmark sweeps over the (tau, k) grid, the access-time model, and reports."""

from __future__ import annotations

import hashlib
import json
import math
import platform
from dataclasses import dataclass, field, fields
from fractions import Fraction
from typing import Callable, Optional, Sequence

import numpy as np

from . import __version__
from .graph import Graph
from .reform import PenaltyConfig, build_bqm, reform_stats, to_ising
from .sa import SaParams, best_feasible, default_beta_range, simulated_anneal

__all__ = [
    "SweepGrid",
    "TimingModel",
    "BenchRow",
    "BenchReport",
    "make_grid",
    "compute_time",
    "run_sweep",
    "emit_report",
    "TABLE_RESOURCES",
    "TABLE_SOLUTIONS",
]


@dataclass(frozen=True)
class SweepGrid:
    """Anneal durations and read counts. Duplicates from rounding are kept."""

    tau_points: tuple
    k_points: tuple

    def __post_init__(self):
        for pts in (self.tau_points, self.k_points):
            if any(b < a for a, b in zip(pts, pts[1:])):
                raise ValueError("grid points must be nondecreasing")
            if any(p < 1 for p in pts):
                raise ValueError("grid points must be positive")

    def pairs(self):
        return [(t, k) for t in self.tau_points for k in self.k_points]

    @property
    def unique_count(self) -> int:
        return len(set(self.tau_points)) * len(set(self.k_points))


def make_grid(points: int = 20, top: int = 1728) -> SweepGrid:
    """``round(12**(3j/19))`` for j = 0..19 on both axes by default.

    The general form spaces ``points`` values from 1 to ``top`` evenly in log.
    """
    if points < 2:
        raise ValueError("need at least two grid points")
    vals = tuple(int(math.floor(top ** (j / (points - 1)) + 0.5)) for j in range(points))
    return SweepGrid(vals, vals)


@dataclass(frozen=True)
class TimingModel:
    """Per-job programming time and per-read readout time, in the unit of tau."""

    t_p: Fraction = Fraction(0)
    t_r: Fraction = Fraction(0)

    def __post_init__(self):
        object.__setattr__(self, "t_p", Fraction(self.t_p))
        object.__setattr__(self, "t_r", Fraction(self.t_r))
        if self.t_p < 0 or self.t_r < 0:
            raise ValueError("timing constants must be nonnegative")


def compute_time(tm: TimingModel, tau, k) -> tuple[Fraction, Fraction]:
    """``(T_A, T)`` with ``T_A = k * tau`` and ``T = T_P + k * (tau + T_R)``."""
    tau, k = Fraction(tau), Fraction(k)
    if tau < 0 or k < 0:
        raise ValueError("tau and k must be nonnegative")
    return k * tau, tm.t_p + k * (tau + tm.t_r)


@dataclass
class BenchRow:
    system: str
    buses: int
    branches: int
    ancillas: Optional[int] = None
    interactions: Optional[int] = None
    embed_qubits: Optional[int] = None
    gamma_exact: Optional[int] = None
    gamma_sa: Optional[int] = None
    gamma_sweep: Optional[int] = None
    tau_star: Optional[int] = None
    k_star: Optional[int] = None
    t_a: Optional[Fraction] = None
    t: Optional[Fraction] = None
    status: str = "ok"
    provenance: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.t_a is not None and self.tau_star is not None and self.t_a != self.tau_star * self.k_star:
            raise ValueError("T_A must equal k* tau*")
        if None not in (self.gamma_sweep, self.gamma_exact) and self.gamma_sweep < self.gamma_exact:
            raise ValueError("a sweep cannot beat the exact domination number")


@dataclass
class BenchReport:
    rows: list
    provenance: dict = field(default_factory=dict)

    def to_json(self) -> str:
        return emit_report(self.rows, self.provenance)[1]

    @classmethod
    def from_json(cls, text: str) -> "BenchReport":
        doc = json.loads(text)
        rows = []
        for r in doc["rows"]:
            r = dict(r)
            for key in ("t_a", "t"):
                if r.get(key) is not None:
                    r[key] = Fraction(r[key])
            rows.append(BenchRow(**r))
        return cls(rows, doc.get("provenance", {}))


def _point_seed(seed: int, tau: int, k: int) -> int:
    # each grid point depends only on (seed, tau, k), so duplicate points agree
    h = hashlib.blake2b(f"{seed}:{tau}:{k}".encode(), digest_size=8).digest()
    return int.from_bytes(h, "little") >> 1


def run_sweep(
    g: Graph,
    cfg: PenaltyConfig = PenaltyConfig(),
    grid: Optional[SweepGrid] = None,
    seed: int = 0,
    backend: str = "sa",
    timing: TimingModel = TimingModel(),
    progress: Optional[Callable[[int, int], None]] = None,
) -> BenchRow:
    """Best feasible PMU count over every (tau, k) grid point.

    The SA backend runs ``k`` reads of ``tau`` sweeps. The ``aqa`` backend
    evolves the state vector once per tau and draws ``k`` reads from it, which
    limits it to models with at most 20 variables.
    """
    grid = grid or make_grid()
    bqm = build_bqm(g, cfg)
    cache: dict = {}
    if backend == "sa":
        beta = default_beta_range(bqm, seed)

        def point(tau, k):
            params = SaParams(num_reads=k, sweeps_per_read=tau, beta_range=beta, seed=_point_seed(seed, tau, k))
            return simulated_anneal(bqm, params)

    elif backend == "aqa":
        from .aqa import MAX_QUBITS, QubitLimitError, Schedule, evolve, sample_reads

        if len(bqm) > MAX_QUBITS:
            raise QubitLimitError(f"{len(bqm)} variables exceed the {MAX_QUBITS}-qubit simulator limit")
        ising = to_ising(bqm)
        states: dict = {}

        def point(tau, k):
            if tau not in states:
                states[tau] = evolve(ising, Schedule(float(tau))).psi
            return sample_reads(states[tau], k, _point_seed(seed, tau, k), bqm)

    else:
        raise ValueError(f"unknown backend {backend!r}")

    best = None
    pairs = grid.pairs()
    for done, (tau, k) in enumerate(pairs, start=1):
        if (tau, k) not in cache:
            hit = best_feasible(g, point(tau, k))
            cache[tau, k] = None if hit is None else hit[1]
        size = cache[tau, k]
        if size is not None:
            key = (size, tau * k, k, tau)
            if best is None or key < best:
                best = key
        if progress:
            progress(done, len(pairs))

    prov = {
        "seed": seed,
        "backend": backend,
        "alpha": [str(a) for a in cfg.alpha] if isinstance(cfg.alpha, tuple) else str(cfg.alpha),
        "slack_mode": cfg.slack_mode.value,
        "grid": {"tau": list(grid.tau_points), "k": list(grid.k_points)},
        "t_p": str(timing.t_p),
        "t_r": str(timing.t_r),
    }
    st = reform_stats(g, cfg)
    row = BenchRow(g.name or "graph", *st.as_tuple(), provenance=prov)
    if best is None:
        row.status = "no feasible"
        return row
    size, _, k, tau = best
    t_a, t = compute_time(timing, tau, k)
    row.gamma_sweep, row.tau_star, row.k_star, row.t_a, row.t = size, tau, k, t_a, t
    return row


TABLE_RESOURCES = ("system", "buses", "branches", "ancillas", "interactions", "embed_qubits")
TABLE_SOLUTIONS = ("system", "gamma_exact", "gamma_sa", "gamma_sweep", "tau_star", "k_star", "t_a", "t", "status")
_COLUMNS = [f.name for f in fields(BenchRow)]


def _cell(v) -> str:
    return "-" if v is None else str(v)


def _table(rows: Sequence[BenchRow], cols: Sequence[str]) -> str:
    body = [[_cell(getattr(r, c)) for c in cols] for r in rows]
    widths = [max([len(c)] + [len(line[i]) for line in body]) for i, c in enumerate(cols)]
    fmt = lambda cells: "  ".join(s.rjust(w) for s, w in zip(cells, widths)).rstrip()
    out = [fmt(cols), fmt(["-" * w for w in widths])]
    out += [fmt(line) for line in body]
    return "\n".join(out) + "\n"


def _plain(v):
    return str(v) if isinstance(v, Fraction) else v


def emit_report(rows: Sequence[BenchRow], provenance: Optional[dict] = None) -> tuple[str, str]:
    """Two aligned text tables and a JSON document carrying every cell."""
    text = "resources\n" + _table(rows, TABLE_RESOURCES) + "\nsolutions\n" + _table(rows, TABLE_SOLUTIONS)
    doc = {
        "columns": _COLUMNS,
        "rows": [{c: _plain(getattr(r, c)) for c in _COLUMNS} for r in rows],
        "provenance": {"version": __version__, "python": platform.python_version(), "numpy": np.__version__, **(provenance or {})},
    }
    return text, json.dumps(doc, indent=1, sort_keys=True) + "\n"
