"""Chimera hardware graphs, heuristic minor embedding, and chain handling.

Qubit ``((row * cols) + col) * 2L + side * L + offset`` sits in unit cell
(row, col); side 0 is the vertical shore and side 1 the horizontal one.
"""

from __future__ import annotations

import json
import random
from dataclasses import dataclass, field
from fractions import Fraction
from functools import cached_property
from typing import Optional, Sequence

import numpy as np
from scipy.sparse import csr_matrix
from scipy.sparse.csgraph import dijkstra, shortest_path

from .reform import Bqm, IsingModel

__all__ = [
    "ChimeraSpec",
    "HardwareGraph",
    "Embedding",
    "PhysicalIsing",
    "build_chimera",
    "clique_bound",
    "interaction_graph",
    "find_embedding",
    "verify_embedding",
    "chain_strength",
    "embed_ising",
    "unembed",
]


@dataclass(frozen=True)
class ChimeraSpec:
    rows: int = 16
    cols: int = 16
    shore: int = 4

    def __post_init__(self):
        if min(self.rows, self.cols, self.shore) < 1:
            raise ValueError("Chimera dimensions must be positive")

    @property
    def num_qubits(self) -> int:
        return self.rows * self.cols * 2 * self.shore

    def linear_index(self, row: int, col: int, side: int, offset: int) -> int:
        return ((row * self.cols) + col) * 2 * self.shore + side * self.shore + offset

    def coordinates(self, q: int) -> tuple[int, int, int, int]:
        cell, rem = divmod(q, 2 * self.shore)
        row, col = divmod(cell, self.cols)
        side, offset = divmod(rem, self.shore)
        return row, col, side, offset


@dataclass(frozen=True, eq=False)
class HardwareGraph:
    """Undirected qubit graph with sorted adjacency lists."""

    num_qubits: int
    edges: tuple
    spec: Optional[ChimeraSpec] = None

    @cached_property
    def adjacency(self) -> tuple:
        adj = [[] for _ in range(self.num_qubits)]
        for a, b in self.edges:
            adj[a].append(b)
            adj[b].append(a)
        return tuple(tuple(sorted(a)) for a in adj)

    @cached_property
    def edge_set(self) -> frozenset:
        return frozenset(self.edges)

    def has_edge(self, a: int, b: int) -> bool:
        return (min(a, b), max(a, b)) in self.edge_set

    @cached_property
    def _csr_pattern(self):
        src = np.array([a for a, b in self.edges] + [b for a, b in self.edges], dtype=np.int32)
        dst = np.array([b for a, b in self.edges] + [a for a, b in self.edges], dtype=np.int32)
        m = csr_matrix((np.ones(len(src)), (src, dst)), shape=(self.num_qubits,) * 2)
        m.sort_indices()
        return m

    @cached_property
    def diameter(self) -> int:
        d = shortest_path(self._csr_pattern, unweighted=True, directed=False)
        finite = d[np.isfinite(d)]
        return int(finite.max()) if finite.size else 0


def build_chimera(spec: ChimeraSpec = ChimeraSpec()) -> HardwareGraph:
    m, n, L = spec.rows, spec.cols, spec.shore
    edges = []
    for r in range(m):
        for c in range(n):
            for i in range(L):
                for j in range(L):
                    edges.append((spec.linear_index(r, c, 0, i), spec.linear_index(r, c, 1, j)))
                if r + 1 < m:
                    edges.append((spec.linear_index(r, c, 0, i), spec.linear_index(r + 1, c, 0, i)))
                if c + 1 < n:
                    edges.append((spec.linear_index(r, c, 1, i), spec.linear_index(r, c + 1, 1, i)))
    edges = tuple(sorted((min(a, b), max(a, b)) for a, b in edges))
    return HardwareGraph(spec.num_qubits, edges, spec)


def clique_bound(spec: ChimeraSpec = ChimeraSpec()) -> tuple[int, int]:
    """Largest embeddable clique order and its edge count."""
    n_max = 1 + spec.shore * min(spec.rows, spec.cols)
    return n_max, n_max * (n_max - 1) // 2


def interaction_graph(model) -> tuple[int, list[tuple[int, int]]]:
    """(node count, edge list) of a Bqm, IsingModel, or an explicit pair."""
    if isinstance(model, Bqm):
        return len(model), list(model.quadratic)
    if isinstance(model, IsingModel):
        return model.num_variables, sorted(model.J)
    n, edges = model
    return int(n), sorted((min(u, v), max(u, v)) for u, v in edges if u != v)


@dataclass
class Embedding:
    """Logical variable index -> sorted tuple of physical qubits."""

    chains: dict
    info: dict = field(default_factory=dict)

    @property
    def num_qubits(self) -> int:
        return sum(len(c) for c in self.chains.values())

    @property
    def max_chain_length(self) -> int:
        return max((len(c) for c in self.chains.values()), default=0)

    def to_json(self, labels: Optional[Sequence] = None) -> str:
        doc = {
            "chains": {
                (str(labels[v]) if labels is not None else str(v)): list(q)
                for v, q in sorted(self.chains.items())
            },
            "qubits": self.num_qubits,
            "info": self.info,
        }
        return json.dumps(doc, indent=1, sort_keys=True) + "\n"

    @classmethod
    def from_json(cls, text: str, labels: Optional[Sequence] = None) -> "Embedding":
        doc = json.loads(text)
        lookup = {str(l): k for k, l in enumerate(labels)} if labels is not None else None
        chains = {}
        for k, q in doc["chains"].items():
            chains[lookup[k] if lookup else int(k)] = tuple(q)
        return cls(chains, doc.get("info", {}))


def verify_embedding(logical, hw: HardwareGraph, e: Embedding) -> tuple[bool, list[str]]:
    """Check chains are nonempty, disjoint, connected, and cover every logical edge."""
    n, edges = interaction_graph(logical)
    problems = []
    owner = {}
    for v in range(n):
        chain = e.chains.get(v)
        if not chain:
            problems.append(f"empty chain for variable {v}")
            continue
        bad = [q for q in chain if not 0 <= q < hw.num_qubits]
        if bad:
            problems.append(f"invalid qubit {bad[0]} in chain {v}")
            continue
        for q in chain:
            if q in owner:
                problems.append(f"overlap: qubit {q} in chains {owner[q]} and {v}")
            else:
                owner[q] = v
        members = set(chain)
        stack, seen = [chain[0]], {chain[0]}
        while stack:
            a = stack.pop()
            for b in hw.adjacency[a]:
                if b in members and b not in seen:
                    seen.add(b)
                    stack.append(b)
        if seen != members:
            problems.append(f"disconnected chain for variable {v}")
    for u, v in edges:
        cu, cv = e.chains.get(u, ()), e.chains.get(v, ())
        if cu and cv and not any(hw.has_edge(a, b) for a in cu for b in cv):
            problems.append(f"missing coupler between chains {u} and {v}")
    return not problems, problems


class _Embedder:
    """One randomized chain-growth run with negotiated, occupancy-weighted paths.

    A qubit costs ``(1 + history) * base**occupancy``, scaled by a small
    random jitter so that equal-cost routes are picked at random. History grows
    on qubits that stay shared after a pass, which pushes contested regions
    apart over successive passes.
    """

    JITTER = 0.5

    def __init__(self, n: int, edges, hw: HardwareGraph, rng: random.Random, max_passes: int):
        self.n = n
        self.hw = hw
        self.rng = rng
        self.np_rng = np.random.default_rng(rng.getrandbits(63))
        self.max_passes = max_passes
        self.nbrs = [set() for _ in range(n)]
        for u, v in edges:
            self.nbrs[u].add(v)
            self.nbrs[v].add(u)
        # one overlap must outweigh any free detour to every neighbour chain
        max_degree = max((len(a) for a in self.nbrs), default=0)
        self.base = float(max(hw.diameter, 2) * (max_degree + 1))
        pattern = hw._csr_pattern
        self.indptr, self.indices = pattern.indptr, pattern.indices
        self.chains: dict[int, set] = {}
        self.occupancy = np.zeros(hw.num_qubits, dtype=np.int64)
        self.history = np.zeros(hw.num_qubits)

    def _weights(self) -> np.ndarray:
        w = (1.0 + self.history) * np.power(self.base, self.occupancy.astype(float))
        return w * (1.0 + self.JITTER * self.np_rng.random(len(w)))

    def _remove(self, v: int):
        for q in self.chains.pop(v, ()):
            self.occupancy[q] -= 1

    def _restore(self, v: int, chain):
        self.chains[v] = chain
        for q in chain:
            self.occupancy[q] += 1

    def _place(self, v: int, exclusive: bool = False):
        w = self._weights()
        if exclusive:
            w[self.occupancy > 0] = _BLOCKED
        placed = [u for u in sorted(self.nbrs[v]) if u in self.chains]
        if not placed:
            chain = {int(np.argmin(w))}
        else:
            graph = csr_matrix((w[self.indices], self.indices, self.indptr), shape=(self.hw.num_qubits,) * 2)
            rootcost = w.copy()
            dists, preds = [], []
            for u in placed:
                src = sorted(self.chains[u])
                d, p, _ = dijkstra(graph, directed=True, indices=src, min_only=True, return_predecessors=True)
                d[src] = w[src]
                # rooting inside a neighbour chain tends to wall that chain in
                rootcost[src] = np.inf
                dists.append(d)
                preds.append(p)
            paths = sum(d - w for d in dists)
            total = rootcost + paths
            if not np.isfinite(total.min()):
                # small chips can be completely covered by neighbour chains
                total = w + paths
            root = int(np.argmin(total))
            best = total[root]
            if not np.isfinite(best) or (exclusive and best >= _BLOCKED):
                raise _Unreachable
            chain = {root}
            for u, p in zip(placed, preds):
                src = self.chains[u]
                q = root
                while q not in src and q >= 0:
                    chain.add(q)
                    q = int(p[q])
        self._restore(v, chain)

    def shared(self) -> int:
        return int((self.occupancy > 1).sum())

    def _order(self) -> list[int]:
        # randomized BFS so that every node after a component's first has a placed neighbour
        remaining = list(range(self.n))
        self.rng.shuffle(remaining)
        seen, order = set(), []
        for start in remaining:
            if start in seen:
                continue
            seen.add(start)
            queue = [start]
            while queue:
                v = queue.pop(0)
                order.append(v)
                nb = sorted(self.nbrs[v] - seen)
                self.rng.shuffle(nb)
                seen.update(nb)
                queue.extend(nb)
        return order

    def _tighten(self, passes: int):
        """Re-place chains with overlap forbidden, keeping strictly shorter ones."""
        for _ in range(passes):
            improved = False
            order = list(range(self.n))
            self.rng.shuffle(order)
            for v in order:
                old = self.chains[v]
                self._remove(v)
                try:
                    self._place(v, exclusive=True)
                except _Unreachable:
                    self._restore(v, old)
                    continue
                if len(self.chains[v]) < len(old) and not self.shared():
                    improved = True
                else:
                    self._remove(v)
                    self._restore(v, old)
            if not improved:
                break

    def _rip_up(self, fraction: float):
        """Re-place every chain on a shared qubit plus a random share of the rest."""
        bad = {v for v, c in self.chains.items() if any(self.occupancy[q] > 1 for q in c)}
        bad |= {v for v in range(self.n) if self.rng.random() < fraction}
        for v in bad:
            self._remove(v)
        redo = sorted(bad)
        self.rng.shuffle(redo)
        for v in redo:
            self._place(v)

    def run(self, tighten_passes: int = 4, stall: int = 4, rip_fraction: float = 0.2) -> Optional[dict]:
        """Chains keyed by variable, or ``None`` if sharing persists.

        After ``stall`` passes without fewer shared qubits the contested
        chains are torn out and rebuilt.
        """
        try:
            for v in self._order():
                self._place(v)
            order = list(range(self.n))
            best, stale = self.shared(), 0
            for _ in range(self.max_passes):
                if not self.shared():
                    break
                self.history[self.occupancy > 1] += 1.0
                if stale >= stall:
                    self._rip_up(rip_fraction)
                    stale = 0
                self.rng.shuffle(order)
                for v in order:
                    self._remove(v)
                    self._place(v)
                now = self.shared()
                if now < best:
                    best, stale = now, 0
                else:
                    stale += 1
        except _Unreachable:
            return None
        if self.shared():
            return None
        self._tighten(tighten_passes)
        return {v: tuple(sorted(c)) for v, c in self.chains.items()}


class _Unreachable(Exception):
    pass


_BLOCKED = 1e15


def find_embedding(
    logical,
    hw: HardwareGraph,
    seed: int = 0,
    tries: int = 10,
    max_passes: int = 60,
) -> Optional[Embedding]:
    """Heuristic minor embedding; the best valid result over ``tries`` seeds.

    Each try places logical nodes in random order, rooting every new chain at
    the qubit with the cheapest combined path to its already-placed
    neighbours. Improvement passes re-place every node with the others fixed
    until no qubit is shared or ``max_passes`` is reached, tearing out the
    contested chains whenever progress stalls. Returns ``None`` if every try
    fails or the logical graph has more edges than the hardware clique bound
    allows.
    """
    n, edges = interaction_graph(logical)
    per_try = []
    if hw.spec is not None:
        _, edge_bound = clique_bound(hw.spec)
        if len(edges) > edge_bound:
            return None
    if n > hw.num_qubits or n == 0:
        return None
    best = None
    for t in range(tries):
        rng = random.Random((seed << 16) ^ t)
        chains = _Embedder(n, edges, hw, rng, max_passes).run()
        if chains is None:
            per_try.append(None)
            continue
        e = Embedding(chains)
        ok, _ = verify_embedding((n, edges), hw, e)
        if not ok:
            per_try.append(None)
            continue
        per_try.append(e.num_qubits)
        if best is None or e.num_qubits < best.num_qubits:
            best = e
    if best is not None:
        best.info = {"seed": seed, "tries": tries, "per_try_qubits": per_try, "min_qubits": best.num_qubits}
    return best


def chain_strength(m: IsingModel, factor=Fraction(3, 2)) -> Fraction:
    """``factor`` times the largest coupling magnitude."""
    if m.num_variables == 0:
        raise ValueError("empty model")
    return Fraction(factor) * m.j_max


@dataclass
class PhysicalIsing:
    """Embedded, autoscaled Ising model over physical qubits.

    For any physical state whose chains are unanimous,
    ``model.energy(state) == scale * (logical_energy + chain_constant)``.
    """

    model: IsingModel
    scale: Fraction
    j_chain: Fraction
    chain_constant: Fraction
    embedding: Embedding
    chain_edges: dict

    def to_json(self) -> str:
        from .reform import dumps_model

        return dumps_model(
            self.model,
            extra={
                "scale": str(self.scale),
                "j_chain": str(self.j_chain),
                "chain_constant": str(self.chain_constant),
                "chains": {str(v): list(c) for v, c in sorted(self.embedding.chains.items())},
            },
        )


def _spanning_tree(chain: Sequence[int], hw: HardwareGraph) -> list[tuple[int, int]]:
    members = set(chain)
    root = min(chain)
    seen = {root}
    queue = [root]
    tree = []
    while queue:
        a = queue.pop(0)
        for b in hw.adjacency[a]:
            if b in members and b not in seen:
                seen.add(b)
                queue.append(b)
                tree.append((min(a, b), max(a, b)))
    return tree


def embed_ising(
    m: IsingModel,
    e: Embedding,
    j_chain,
    hw: HardwareGraph,
    h_range: Fraction = Fraction(2),
    j_range: tuple = (Fraction(-1), Fraction(1)),
) -> PhysicalIsing:
    """Spread a logical Ising model over chains and autoscale it.

    Fields split evenly over chain qubits; each logical coupling goes on the
    lowest-index hardware edge between its two chains; chains are bound by
    couplings of ``-j_chain`` on a BFS spanning tree. Everything, including
    the offset, is then multiplied by ``min(1, h_range/|h|max, ...)`` so that
    fields and couplings fit the analog ranges. ``j_range=(-2, 1)`` selects
    the extended negative-coupling range.
    """
    ok, problems = verify_embedding(m, hw, e)
    if not ok:
        raise ValueError(f"invalid embedding: {problems[0]}")
    j_chain = Fraction(j_chain)
    h: dict[int, Fraction] = {}
    J: dict[tuple[int, int], Fraction] = {}
    for v, chain in e.chains.items():
        share = m.h[v] / len(chain)
        for q in chain:
            h[q] = share
    for (u, v), c in m.J.items():
        a, b = min((min(a, b), max(a, b)) for a in e.chains[u] for b in e.chains[v] if hw.has_edge(a, b))
        J[(a, b)] = J.get((a, b), Fraction(0)) + c
    chain_edges = {}
    n_tree = 0
    for v, chain in e.chains.items():
        tree = _spanning_tree(chain, hw)
        chain_edges[v] = tree
        n_tree += len(tree)
        for a, b in tree:
            J[(a, b)] = J.get((a, b), Fraction(0)) - j_chain

    lo, hi = Fraction(j_range[0]), Fraction(j_range[1])
    scale = Fraction(1)
    hmax = max((abs(x) for x in h.values()), default=Fraction(0))
    if hmax:
        scale = min(scale, Fraction(h_range) / hmax)
    pos = max((x for x in J.values() if x > 0), default=Fraction(0))
    neg = max((-x for x in J.values() if x < 0), default=Fraction(0))
    if pos:
        scale = min(scale, hi / pos)
    if neg:
        scale = min(scale, -lo / neg)

    qubits = sorted(h)
    pos_of = {q: k for k, q in enumerate(qubits)}
    model = IsingModel(
        tuple(qubits),
        tuple(h[q] * scale for q in qubits),
        {(pos_of[a], pos_of[b]): c * scale for (a, b), c in sorted(J.items()) if c != 0},
        m.offset * scale,
    )
    return PhysicalIsing(model, scale, j_chain, -j_chain * n_tree, e, chain_edges)


def unembed(sample, e: Embedding) -> tuple[dict, Fraction]:
    """Majority-vote each chain; ties take the lowest-index qubit's spin.

    ``sample`` maps qubit -> spin (a dict, or a sequence indexed by qubit).
    Returns (variable -> spin, fraction of broken chains).
    """
    logical = {}
    broken = 0
    for v, chain in sorted(e.chains.items()):
        spins = [int(sample[q]) for q in chain]
        total = sum(spins)
        if all(s == spins[0] for s in spins):
            logical[v] = spins[0]
            continue
        broken += 1
        if total > 0:
            logical[v] = 1
        elif total < 0:
            logical[v] = -1
        else:
            logical[v] = spins[0]
    n = len(e.chains)
    return logical, Fraction(broken, n) if n else Fraction(0)
