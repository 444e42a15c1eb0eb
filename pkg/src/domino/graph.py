"""Power-grid graphs, observability, and classical domination solvers.

Buses are nodes and branches are edges. Node indices are 0-based in memory
and 1-based in edge-list files.
"""

from __future__ import annotations

import io
import os
from dataclasses import dataclass, field
from importlib import resources
from typing import Iterable, Optional, Sequence

import numpy as np

__all__ = [
    "Graph",
    "ObservabilityMatrix",
    "ParseError",
    "EmptyInputError",
    "InexactError",
    "parse_edge_list",
    "read_edge_list",
    "load_case",
    "CASES",
    "observability_matrix",
    "is_dominating",
    "greedy_dominating",
    "exact_domination_number",
]

CASES = ("ieee9", "ieee14", "ieee24", "ieee30", "ieee39", "ieee57", "ieee118", "ieee300")


class ParseError(ValueError):
    """Malformed edge-list line."""

    def __init__(self, lineno: int, line: str, reason: str):
        super().__init__(f"line {lineno}: {reason}: {line!r}")
        self.lineno = lineno


class EmptyInputError(ValueError):
    pass


class InexactError(RuntimeError):
    """Exact search gave up; use simulated annealing for an upper bound."""


@dataclass(frozen=True)
class Graph:
    """Simple undirected graph.

    ``edges`` holds ``(u, v)`` pairs with ``u < v``. ``dropped_self_loops`` and
    ``merged_duplicates`` record what ingestion removed.
    """

    node_count: int
    edges: frozenset
    adjacency: tuple = field(init=False, repr=False, compare=False)
    dropped_self_loops: int = field(default=0, compare=False)
    merged_duplicates: int = field(default=0, compare=False)
    name: str = field(default="", compare=False)

    def __post_init__(self):
        if self.node_count < 1:
            raise EmptyInputError("graph has no nodes")
        adj = [[] for _ in range(self.node_count)]
        for u, v in self.edges:
            if not (0 <= u < v < self.node_count):
                raise ValueError(f"bad edge {(u, v)} for {self.node_count} nodes")
            adj[u].append(v)
            adj[v].append(u)
        object.__setattr__(self, "adjacency", tuple(tuple(sorted(a)) for a in adj))

    @classmethod
    def from_edges(cls, node_count: int, edges: Iterable[tuple[int, int]], name: str = "") -> "Graph":
        """Build from 0-based pairs, silently dropping loops and duplicates."""
        es = {(min(u, v), max(u, v)) for u, v in edges if u != v}
        return cls(node_count, frozenset(es), name=name)

    @property
    def degrees(self) -> tuple[int, ...]:
        return tuple(len(a) for a in self.adjacency)

    def closed_neighborhood(self, i: int) -> tuple[int, ...]:
        return tuple(sorted((i, *self.adjacency[i])))

    def sorted_edges(self) -> list[tuple[int, int]]:
        return sorted(self.edges)

    def closed_masks(self) -> list[int]:
        """Closed neighbourhoods as int bitmasks (bit j set iff j in N[i])."""
        masks = []
        for i, nbrs in enumerate(self.adjacency):
            m = 1 << i
            for j in nbrs:
                m |= 1 << j
            masks.append(m)
        return masks

    def add_edge(self, u: int, v: int) -> "Graph":
        return Graph.from_edges(self.node_count, [*self.edges, (u, v)], name=self.name)

    def to_edge_list(self) -> str:
        lines = [f"nodes {self.node_count}"]
        lines += [f"{u + 1} {v + 1}" for u, v in self.sorted_edges()]
        return "\n".join(lines) + "\n"


@dataclass(frozen=True)
class ObservabilityMatrix:
    """Rows are closed neighbourhoods, i.e. the sparsity of adjacency + identity."""

    rows: tuple
    rhs: tuple

    def dense(self) -> np.ndarray:
        n = len(self.rows)
        a = np.zeros((n, n), dtype=np.int64)
        for i, row in enumerate(self.rows):
            a[i, list(row)] = 1
        return a

    def coverage(self, x: Sequence[int]) -> np.ndarray:
        """A @ x for a 0/1 decision vector."""
        x = np.asarray(x, dtype=np.int64)
        return np.array([int(x[list(r)].sum()) for r in self.rows], dtype=np.int64)


def observability_matrix(g: Graph, rhs: Optional[Sequence[int]] = None) -> ObservabilityMatrix:
    rows = tuple(g.closed_neighborhood(i) for i in range(g.node_count))
    if rhs is None:
        rhs = (1,) * g.node_count
    if len(rhs) != g.node_count:
        raise ValueError("rhs length does not match node count")
    return ObservabilityMatrix(rows, tuple(int(b) for b in rhs))


def parse_edge_list(text, name: str = "") -> Graph:
    """Parse a 1-based ``u v`` edge list.

    ``text`` may be a string or a text stream. ``#`` starts a comment and an
    optional ``nodes K`` line fixes the node count, otherwise the largest bus
    ID is used. Self-loops are dropped and parallel edges merged.
    """
    if isinstance(text, str):
        text = io.StringIO(text)
    declared = None
    max_id = 0
    seen = set()
    loops = dups = 0
    for lineno, raw in enumerate(text, start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        parts = line.split()
        if parts[0].lower() == "nodes":
            if len(parts) != 2 or not parts[1].isdigit():
                raise ParseError(lineno, raw.rstrip("\n"), "expected 'nodes K'")
            declared = int(parts[1])
            continue
        if len(parts) != 2:
            raise ParseError(lineno, raw.rstrip("\n"), "expected two bus IDs")
        try:
            u, v = int(parts[0]), int(parts[1])
        except ValueError:
            raise ParseError(lineno, raw.rstrip("\n"), "bus IDs must be integers") from None
        if u < 1 or v < 1:
            raise ParseError(lineno, raw.rstrip("\n"), "bus IDs are 1-based")
        max_id = max(max_id, u, v)
        if u == v:
            loops += 1
            continue
        key = (min(u, v) - 1, max(u, v) - 1)
        if key in seen:
            dups += 1
            continue
        seen.add(key)
    n = declared if declared is not None else max_id
    if n == 0:
        raise EmptyInputError("edge list defines no nodes")
    if max_id > n:
        raise ParseError(0, "", f"bus ID {max_id} exceeds declared node count {n}")
    return Graph(n, frozenset(seen), dropped_self_loops=loops, merged_duplicates=dups, name=name)


def read_edge_list(path: str | os.PathLike) -> Graph:
    with open(path, encoding="utf-8") as fh:
        return parse_edge_list(fh, name=os.path.splitext(os.path.basename(path))[0])


def load_case(name: str) -> Graph:
    """Load a bundled IEEE test system, e.g. ``load_case("ieee14")``."""
    if name not in CASES:
        raise KeyError(f"unknown case {name!r}; choose from {', '.join(CASES)}")
    ref = resources.files("domino") / "data" / f"{name}.edges"
    with ref.open("r", encoding="utf-8") as fh:
        return parse_edge_list(fh, name=name)


def _as_members(s) -> set[int]:
    if isinstance(s, (set, frozenset)):
        return set(s)
    arr = list(s)
    return {i for i, v in enumerate(arr) if v}


def is_dominating(g: Graph, s) -> tuple[bool, frozenset]:
    """Check observability of every bus.

    ``s`` is either a set of node indices or a 0/1 sequence of length N.
    Returns ``(ok, uncovered)``.
    """
    members = _as_members(s)
    if any(not 0 <= i < g.node_count for i in members):
        raise ValueError("node index out of range")
    covered = set(members)
    for i in members:
        covered.update(g.adjacency[i])
    uncovered = frozenset(set(range(g.node_count)) - covered)
    return not uncovered, uncovered


def greedy_dominating(g: Graph) -> frozenset:
    """Repeatedly take the node covering most uncovered nodes (lowest index on ties)."""
    masks = g.closed_masks()
    uncovered = (1 << g.node_count) - 1
    chosen = set()
    while uncovered:
        best = max(range(g.node_count), key=lambda i: (bin(masks[i] & uncovered).count("1"), -i))
        chosen.add(best)
        uncovered &= ~masks[best]
    return frozenset(chosen)


def exact_domination_number(
    g: Graph,
    node_budget_limit: Optional[int] = None,
    force: bool = False,
) -> tuple[int, frozenset]:
    """Domination number and a witness by iterative-deepening branch and bound.

    The greedy set gives the upper bound. For each candidate size k the search
    branches on the closed neighbourhood of the lowest-index uncovered node,
    pruning when the remaining budget cannot cover what is left.

    Raises
    ------
    InexactError
        If ``node_budget_limit`` search nodes are exhausted, or N > 40 without
        ``force``.
    """
    n = g.node_count
    if n > 40 and not force:
        raise InexactError(f"N={n} exceeds the exhaustive-search guard (40); use simulated annealing")
    masks = g.closed_masks()
    full = (1 << n) - 1
    greedy = greedy_dominating(g)
    max_cover = max(bin(m).count("1") for m in masks)
    expanded = 0

    def search(uncovered: int, budget: int, chosen: list[int]) -> Optional[list[int]]:
        nonlocal expanded
        if not uncovered:
            return chosen
        if budget == 0:
            return None
        remaining = bin(uncovered).count("1")
        if remaining > budget * max_cover:
            return None
        expanded += 1
        if node_budget_limit is not None and expanded > node_budget_limit:
            raise InexactError(f"search budget of {node_budget_limit} nodes exhausted; use simulated annealing")
        low = (uncovered & -uncovered).bit_length() - 1
        # any dominating set must contain some member of N[low]
        cands = sorted(
            (j for j in range(n) if masks[low] >> j & 1),
            key=lambda j: (-bin(masks[j] & uncovered).count("1"), j),
        )
        for j in cands:
            found = search(uncovered & ~masks[j], budget - 1, chosen + [j])
            if found is not None:
                return found
        return None

    lower = -(-n // max_cover)
    for k in range(lower, len(greedy)):
        found = search(full, k, [])
        if found is not None:
            return len(found), frozenset(found)
    return len(greedy), greedy
