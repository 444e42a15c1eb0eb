"""Penalized binary quadratic model for minimum dominating set.

The model minimised is

    H(x, y) = sum_i x_i + sum_i alpha_i (sum_j A_ij x_j - b_i - sum_mu 2^mu y_imu)^2

over PMU decision bits ``x`` and binary-expanded surplus bits ``y``. All
coefficients are held as :class:`fractions.Fraction`; floats appear only at
solver boundaries.
"""

from __future__ import annotations

import enum
import json
import math
from dataclasses import dataclass
from fractions import Fraction
from functools import cached_property
from typing import Any, Hashable, Mapping, NamedTuple, Optional, Sequence

import numpy as np

from .graph import Graph, observability_matrix

__all__ = [
    "Decision",
    "Slack",
    "SlackMode",
    "PenaltyConfig",
    "InfeasibleRowError",
    "Bqm",
    "IsingModel",
    "ReformStats",
    "slack_bits",
    "build_bqm",
    "interaction_count",
    "evaluate",
    "energies",
    "to_ising",
    "feasible",
    "reform_stats",
    "dumps_model",
    "loads_model",
]


class Decision(NamedTuple):
    """PMU placement bit x_i."""

    i: int

    def __str__(self):
        return f"x{self.i}"


class Slack(NamedTuple):
    """Bit ``mu`` of the surplus variable for observability row ``i``."""

    i: int
    mu: int

    def __str__(self):
        return f"y{self.i}_{self.mu}"


class SlackMode(str, enum.Enum):
    #: ceil(log2(d + 1 - b)) bits; a surplus of exactly d + 1 - b is lost when that is a power of two
    PAPER = "paper"
    #: ceil(log2(d + 2 - b)) bits; every surplus in [0, d + 1 - b] is representable
    SAFE = "safe"


class InfeasibleRowError(ValueError):
    pass


def _frac(v) -> Fraction:
    return v if isinstance(v, Fraction) else Fraction(v)


@dataclass(frozen=True)
class PenaltyConfig:
    """Penalty weights and slack sizing.

    ``alpha`` is either one weight for every row or a per-row sequence.
    """

    alpha: Any = 2
    slack_mode: SlackMode = SlackMode.PAPER

    def __post_init__(self):
        object.__setattr__(self, "slack_mode", SlackMode(self.slack_mode))
        if isinstance(self.alpha, (list, tuple)):
            a = tuple(_frac(v) for v in self.alpha)
        else:
            a = _frac(self.alpha)
        object.__setattr__(self, "alpha", a)
        if any(v <= 0 for v in (a if isinstance(a, tuple) else (a,))):
            raise ValueError("penalty weights must be positive")

    def weights(self, n: int) -> tuple[Fraction, ...]:
        if isinstance(self.alpha, tuple):
            if len(self.alpha) != n:
                raise ValueError(f"expected {n} penalty weights, got {len(self.alpha)}")
            return self.alpha
        return (self.alpha,) * n


def slack_bits(d: int, b: int = 1, mode: SlackMode | str = SlackMode.PAPER) -> int:
    """Number of surplus bits for a row with degree ``d`` and right-hand side ``b``.

    Uses ceil(log2(0)) = ceil(log2(1)) = 0.
    """
    mode = SlackMode(mode)
    top = d + 1 - b
    if top < 0:
        raise InfeasibleRowError(f"row with degree {d} can never reach rhs {b}")
    if mode is SlackMode.PAPER:
        return (top - 1).bit_length() if top > 1 else 0
    return top.bit_length()


class Bqm:
    """Binary quadratic model with exact rational coefficients.

    Parameters
    ----------
    variables : sequence of hashable labels, in index order
    linear : mapping label -> coefficient
    quadratic : mapping (label, label) -> coefficient; pairs are unordered
    offset : constant term

    Zero quadratic entries are discarded; repeated pairs are summed.
    """

    def __init__(
        self,
        variables: Sequence[Hashable],
        linear: Optional[Mapping] = None,
        quadratic: Optional[Mapping] = None,
        offset=0,
        info: Optional[dict] = None,
    ):
        self.variables = tuple(variables)
        self.index = {v: k for k, v in enumerate(self.variables)}
        if len(self.index) != len(self.variables):
            raise ValueError("duplicate variable labels")
        lin = [Fraction(0)] * len(self.variables)
        for v, c in (linear or {}).items():
            lin[self.index[v]] += _frac(c)
        quad: dict[tuple[int, int], Fraction] = {}
        for (u, v), c in (quadratic or {}).items():
            a, b = self.index[u], self.index[v]
            if a == b:
                raise ValueError(f"self-interaction on {u!r}")
            key = (a, b) if a < b else (b, a)
            quad[key] = quad.get(key, Fraction(0)) + _frac(c)
        self.linear: tuple[Fraction, ...] = tuple(lin)
        self.quadratic: dict[tuple[int, int], Fraction] = {k: c for k, c in sorted(quad.items()) if c != 0}
        self.offset = _frac(offset)
        self.info = dict(info or {})

    def __len__(self):
        return len(self.variables)

    def __eq__(self, other):
        return (
            isinstance(other, Bqm)
            and self.variables == other.variables
            and self.linear == other.linear
            and self.quadratic == other.quadratic
            and self.offset == other.offset
        )

    def __repr__(self):
        return f"Bqm({len(self)} variables, {len(self.quadratic)} interactions, offset={self.offset})"

    @property
    def num_variables(self) -> int:
        return len(self.variables)

    def decision_indices(self) -> list[int]:
        return [k for k, v in enumerate(self.variables) if isinstance(v, Decision)]

    def interaction_edges(self) -> list[tuple[int, int]]:
        return list(self.quadratic)

    @cached_property
    def scaled(self):
        """Integer form: (denominator, linear, rows, cols, quad, offset) with int64 arrays."""
        coeffs = [*self.linear, *self.quadratic.values(), self.offset]
        den = 1
        for c in coeffs:
            den = math.lcm(den, c.denominator)
        lin = [int(c * den) for c in self.linear]
        qv = [int(c * den) for c in self.quadratic.values()]
        bound = sum(abs(c) for c in lin) + sum(abs(c) for c in qv) + abs(int(self.offset * den))
        dtype = np.int64 if bound < 2**62 else object
        rows = np.array([u for u, _ in self.quadratic], dtype=np.intp)
        cols = np.array([v for _, v in self.quadratic], dtype=np.intp)
        return (
            den,
            np.array(lin, dtype=dtype),
            rows,
            cols,
            np.array(qv, dtype=dtype),
            int(self.offset * den),
        )

    def to_numpy(self):
        """Float copies: (linear, rows, cols, quad, offset)."""
        return (
            np.array([float(c) for c in self.linear]),
            np.array([u for u, _ in self.quadratic], dtype=np.intp),
            np.array([v for _, v in self.quadratic], dtype=np.intp),
            np.array([float(c) for c in self.quadratic.values()]),
            float(self.offset),
        )


@dataclass(frozen=True)
class IsingModel:
    """Spin model ``E(s) = offset + sum h_i s_i + sum J_ij s_i s_j`` with s = 1 - 2x.

    Relative to the textbook negated convention ``-sum J_i Z_i - sum J_ij Z_i Z_j``
    the stored fields are ``h = -J_i`` and ``J = -J_ij``.
    """

    variables: tuple
    h: tuple
    J: dict
    offset: Fraction = Fraction(0)

    @property
    def num_variables(self) -> int:
        return len(self.variables)

    @property
    def h_max(self) -> Fraction:
        return max((abs(v) for v in self.h), default=Fraction(0))

    @property
    def j_max(self) -> Fraction:
        return max((abs(v) for v in self.J.values()), default=Fraction(0))

    def energy(self, spins: Sequence[int]) -> Fraction:
        if len(spins) != len(self.variables):
            raise ValueError("spin vector length does not match variable count")
        e = self.offset
        for hi, s in zip(self.h, spins):
            if hi:
                e += hi * s
        for (u, v), c in self.J.items():
            e += c * spins[u] * spins[v]
        return e

    @cached_property
    def scaled(self):
        """Integer form (den, h, rows, cols, J, offset) as in :attr:`Bqm.scaled`."""
        den = 1
        for c in (*self.h, *self.J.values(), self.offset):
            den = math.lcm(den, c.denominator)
        h = [int(c * den) for c in self.h]
        j = [int(c * den) for c in self.J.values()]
        bound = sum(map(abs, h)) + sum(map(abs, j)) + abs(int(self.offset * den))
        dtype = np.int64 if bound < 2**62 else object
        return (
            den,
            np.array(h, dtype=dtype),
            np.array([u for u, _ in self.J], dtype=np.intp),
            np.array([v for _, v in self.J], dtype=np.intp),
            np.array(j, dtype=dtype),
            int(self.offset * den),
        )

    def energies(self, spins: np.ndarray) -> list[Fraction]:
        """Exact energies for a (samples, n) array of +/-1 spins."""
        den, h, r, c, j, off = self.scaled
        s = np.asarray(spins, dtype=np.int64).astype(h.dtype)
        num = off + s @ h + (s[:, r] * s[:, c]) @ j if len(j) else off + s @ h
        return [Fraction(int(v), den) for v in num]

    def to_numpy(self):
        return (
            np.array([float(c) for c in self.h]),
            np.array([u for u, _ in self.J], dtype=np.intp),
            np.array([v for _, v in self.J], dtype=np.intp),
            np.array([float(c) for c in self.J.values()]),
            float(self.offset),
        )


def build_bqm(g: Graph, cfg: PenaltyConfig = PenaltyConfig(), rhs: Optional[Sequence[int]] = None) -> Bqm:
    """Assemble cost plus squared-penalty rows for graph ``g``.

    Variables are ordered as all decision bits ascending, then slack bits by
    (node, bit).
    """
    obs = observability_matrix(g, rhs)
    alphas = cfg.weights(g.node_count)
    degrees = g.degrees
    nbits = [slack_bits(degrees[i], obs.rhs[i], cfg.slack_mode) for i in range(g.node_count)]

    variables = [Decision(i) for i in range(g.node_count)]
    variables += [Slack(i, mu) for i in range(g.node_count) for mu in range(nbits[i])]
    index = {v: k for k, v in enumerate(variables)}

    linear = [Fraction(0)] * len(variables)
    quad: dict[tuple[int, int], Fraction] = {}
    structural = set()
    offset = Fraction(0)
    for i in range(g.node_count):
        linear[i] += 1
    for i, row in enumerate(obs.rows):
        a = alphas[i]
        c0 = -obs.rhs[i]
        terms = [(index[Decision(j)], 1) for j in row]
        terms += [(index[Slack(i, mu)], -(1 << mu)) for mu in range(nbits[i])]
        offset += a * c0 * c0
        for k, ck in terms:
            linear[k] += a * (ck * ck + 2 * c0 * ck)
        for p in range(len(terms)):
            kp, cp = terms[p]
            for q in range(p + 1, len(terms)):
                kq, cq = terms[q]
                key = (kp, kq) if kp < kq else (kq, kp)
                structural.add(key)
                quad[key] = quad.get(key, Fraction(0)) + 2 * a * cp * cq

    cancelled = sum(1 for k in structural if quad[k] == 0)
    info = {
        "graph": g.name,
        "nodes": g.node_count,
        "edges": len(g.edges),
        "slack_mode": cfg.slack_mode.value,
        "slack_bits": nbits,
        "rhs": list(obs.rhs),
        "alpha": [str(a) for a in alphas],
        "cancelled_pairs": cancelled,
    }
    return Bqm(
        variables,
        {variables[k]: c for k, c in enumerate(linear)},
        {(variables[u], variables[v]): c for (u, v), c in quad.items()},
        offset,
        info=info,
    )


def interaction_count(b: Bqm) -> int:
    """Distinct variable pairs with a nonzero quadratic coefficient."""
    return len(b.quadratic)


def evaluate(b: Bqm, assignment: Sequence[int]) -> Fraction:
    """Exact energy of one 0/1 assignment."""
    if len(assignment) != len(b):
        raise ValueError(f"assignment has {len(assignment)} entries, model has {len(b)} variables")
    e = b.offset
    for c, x in zip(b.linear, assignment):
        if x:
            e += c
    for (u, v), c in b.quadratic.items():
        if assignment[u] and assignment[v]:
            e += c
    return e


def energies(b: Bqm, samples) -> list[Fraction]:
    """Exact energies of a (samples, n) 0/1 array via scaled integer arithmetic."""
    x = np.asarray(samples)
    if x.ndim == 1:
        x = x[None, :]
    if x.shape[1] != len(b):
        raise ValueError("sample width does not match variable count")
    den, lin, r, c, q, off = b.scaled
    x = x.astype(lin.dtype)
    num = x @ lin + off
    if len(q):
        num = num + (x[:, r] * x[:, c]) @ q
    return [Fraction(int(v), den) for v in num]


def to_ising(b: Bqm) -> IsingModel:
    """Exact change of variables x = (1 - s) / 2."""
    h = [Fraction(0)] * len(b)
    J: dict[tuple[int, int], Fraction] = {}
    offset = b.offset
    for k, a in enumerate(b.linear):
        offset += a / 2
        h[k] -= a / 2
    for (u, v), q in b.quadratic.items():
        offset += q / 4
        h[u] -= q / 4
        h[v] -= q / 4
        J[(u, v)] = q / 4
    return IsingModel(b.variables, tuple(h), J, offset)


def feasible(g: Graph, sample: Sequence[int], rhs: Optional[Sequence[int]] = None) -> bool:
    """A x >= b on the decision bits (the first N entries); slack bits are ignored."""
    if len(sample) < g.node_count:
        raise ValueError("sample shorter than node count")
    obs = observability_matrix(g, rhs)
    x = [1 if sample[i] else 0 for i in range(g.node_count)]
    return all(sum(x[j] for j in row) >= bi for row, bi in zip(obs.rows, obs.rhs))


@dataclass(frozen=True)
class ReformStats:
    buses: int
    branches: int
    ancillas: int
    interactions: int

    def as_tuple(self):
        return (self.buses, self.branches, self.ancillas, self.interactions)


def reform_stats(g: Graph, cfg: PenaltyConfig = PenaltyConfig()) -> ReformStats:
    b = build_bqm(g, cfg)
    return ReformStats(g.node_count, len(g.edges), sum(b.info["slack_bits"]), interaction_count(b))


# ---------------------------------------------------------------------------
# structured text export


def _label(v) -> str:
    return str(v)


def _parse_label(s: str):
    if s.startswith("x") and s[1:].isdigit():
        return Decision(int(s[1:]))
    if s.startswith("y") and "_" in s:
        i, mu = s[1:].split("_", 1)
        if i.isdigit() and mu.isdigit():
            return Slack(int(i), int(mu))
    return s


def dumps_model(m, extra: Optional[dict] = None) -> str:
    """Serialise a :class:`Bqm` or :class:`IsingModel` to deterministic JSON.

    Coefficients are written as exact rational strings (``"-3/4"``).
    """
    labels = [_label(v) for v in m.variables]
    if isinstance(m, Bqm):
        doc = {
            "kind": "bqm",
            "variables": labels,
            "linear": {labels[k]: str(c) for k, c in enumerate(m.linear) if c},
            "quadratic": [[labels[u], labels[v], str(c)] for (u, v), c in m.quadratic.items()],
            "offset": str(m.offset),
        }
    elif isinstance(m, IsingModel):
        doc = {
            "kind": "ising",
            "variables": labels,
            "h": {labels[k]: str(c) for k, c in enumerate(m.h) if c},
            "J": [[labels[u], labels[v], str(c)] for (u, v), c in sorted(m.J.items())],
            "offset": str(m.offset),
            "h_max": str(m.h_max),
            "j_max": str(m.j_max),
        }
    else:
        raise TypeError(f"cannot serialise {type(m).__name__}")
    if extra:
        doc.update(extra)
    return json.dumps(doc, indent=1, sort_keys=True) + "\n"


def loads_model(text: str):
    doc = json.loads(text)
    variables = [_parse_label(s) for s in doc["variables"]]
    lookup = dict(zip(doc["variables"], variables))
    if doc["kind"] == "bqm":
        return Bqm(
            variables,
            {lookup[k]: Fraction(c) for k, c in doc["linear"].items()},
            {(lookup[u], lookup[v]): Fraction(c) for u, v, c in doc["quadratic"]},
            Fraction(doc["offset"]),
        )
    if doc["kind"] == "ising":
        idx = {s: k for k, s in enumerate(doc["variables"])}
        h = [Fraction(0)] * len(variables)
        for k, c in doc["h"].items():
            h[idx[k]] = Fraction(c)
        J = {}
        for u, v, c in doc["J"]:
            a, b = sorted((idx[u], idx[v]))
            J[(a, b)] = Fraction(c)
        return IsingModel(tuple(variables), tuple(h), J, Fraction(doc["offset"]))
    raise ValueError(f"unknown model kind {doc['kind']!r}")
