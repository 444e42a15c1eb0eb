"""Simulated annealing and exhaustive ground-state search for :class:`Bqm` models."""

from __future__ import annotations

import hashlib
import itertools
import json
import math
import time
from dataclasses import asdict, dataclass, field
from fractions import Fraction
from typing import Optional, Sequence

import numba
import numpy as np

from .graph import Graph, observability_matrix
from .reform import Bqm, energies

__all__ = [
    "SaParams",
    "SampleSet",
    "TooManyVariablesError",
    "simulated_anneal",
    "default_beta_range",
    "brute_force_ground",
    "best_feasible",
    "instance_hash",
]

_MASK64 = (1 << 64) - 1


class TooManyVariablesError(ValueError):
    pass


@dataclass(frozen=True)
class SaParams:
    """``num_reads`` plays the role of k and ``sweeps_per_read`` the role of tau.

    ``beta_range=None`` derives (beta_hot, beta_cold) from sampled flip deltas.
    """

    num_reads: int = 100
    sweeps_per_read: int = 1000
    beta_range: Optional[tuple[float, float]] = None
    seed: int = 0

    def __post_init__(self):
        if self.num_reads < 0 or self.sweeps_per_read < 1:
            raise ValueError("num_reads must be >= 0 and sweeps_per_read >= 1")
        if self.beta_range is not None:
            hot, cold = self.beta_range
            if not (0 < hot < cold):
                raise ValueError("need 0 < beta_hot < beta_cold")


@dataclass
class SampleSet:
    """Distinct samples sorted by (energy, assignment), with multiplicities."""

    samples: np.ndarray
    energies: list
    counts: np.ndarray
    info: dict = field(default_factory=dict)

    @classmethod
    def from_samples(cls, bqm: Optional[Bqm], states, energy_values=None, info=None) -> "SampleSet":
        states = np.asarray(states, dtype=np.int8)
        width = states.shape[1] if states.ndim == 2 else (len(bqm) if bqm is not None else 0)
        if states.size == 0:
            return cls(np.zeros((0, width), dtype=np.int8), [], np.zeros(0, dtype=np.int64), dict(info or {}))
        uniq, inverse, counts = np.unique(states, axis=0, return_inverse=True, return_counts=True)
        if energy_values is None:
            e = energies(bqm, uniq)
        else:
            e = [None] * len(uniq)
            for k, ev in zip(inverse.ravel(), energy_values):
                e[k] = ev
        order = sorted(range(len(uniq)), key=lambda k: (e[k], tuple(uniq[k])))
        return cls(uniq[order], [e[k] for k in order], counts[order], dict(info or {}))

    def __len__(self):
        return len(self.energies)

    @property
    def num_reads(self) -> int:
        return int(self.counts.sum())

    @property
    def lowest_energy(self):
        return self.energies[0] if self.energies else None

    def records(self):
        for s, e, c in zip(self.samples, self.energies, self.counts):
            yield tuple(int(v) for v in s), e, int(c)

    def to_json(self) -> str:
        doc = {
            "records": [
                {"assignment": "".join(str(v) for v in s), "energy": str(e), "count": c}
                for s, e, c in self.records()
            ],
            "info": {k: v for k, v in sorted(self.info.items()) if k != "elapsed"},
        }
        return json.dumps(doc, indent=1, sort_keys=True, default=str) + "\n"

    @classmethod
    def from_json(cls, text: str) -> "SampleSet":
        doc = json.loads(text)
        recs = doc["records"]
        if not recs:
            return cls(np.zeros((0, 0), dtype=np.int8), [], np.zeros(0, dtype=np.int64), doc.get("info", {}))
        samples = np.array([[int(ch) for ch in r["assignment"]] for r in recs], dtype=np.int8)
        return cls(
            samples,
            [Fraction(r["energy"]) for r in recs],
            np.array([r["count"] for r in recs], dtype=np.int64),
            doc.get("info", {}),
        )


def instance_hash(bqm: Bqm) -> str:
    from .reform import dumps_model

    cached = bqm.__dict__.get("_instance_hash")
    if cached is None:
        cached = hashlib.sha256(dumps_model(bqm).encode()).hexdigest()[:16]
        bqm.__dict__["_instance_hash"] = cached
    return cached


def _splitmix(x: int) -> int:
    x = (x + 0x9E3779B97F4A7C15) & _MASK64
    z = x
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & _MASK64
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & _MASK64
    return z ^ (z >> 31)


def read_seeds(seed: int, num_reads: int) -> np.ndarray:
    """Per-read RNG states derived from ``seed XOR read_index``."""
    return np.array([_splitmix((seed ^ r) & _MASK64) or 1 for r in range(num_reads)], dtype=np.uint64)


@numba.njit(cache=True)
def _next(state):
    # xorshift64*
    x = state
    x ^= x >> np.uint64(12)
    x ^= x << np.uint64(25)
    x ^= x >> np.uint64(27)
    return x, x * np.uint64(0x2545F4914F6CDD1D)


@numba.njit(cache=True)
def _uniform(state):
    state, r = _next(state)
    return state, (r >> np.uint64(11)) * (1.0 / 9007199254740992.0)


@numba.njit(cache=True)
def _anneal_kernel(linear, indptr, nbrs, weights, betas, seeds, init, use_init):
    n = linear.shape[0]
    reads = seeds.shape[0]
    out = np.empty((reads, n), dtype=np.int8)
    for r in range(reads):
        state = seeds[r]
        x = np.empty(n, dtype=np.int8)
        if use_init:
            for k in range(n):
                x[k] = init[r, k]
        else:
            for k in range(n):
                state, u = _uniform(state)
                x[k] = 1 if u < 0.5 else 0
        field_ = linear.copy()
        for k in range(n):
            if x[k]:
                for p in range(indptr[k], indptr[k + 1]):
                    field_[nbrs[p]] += weights[p]
        for beta in betas:
            for k in range(n):
                de = field_[k] if x[k] == 0 else -field_[k]
                if de > 0.0:
                    bde = beta * de
                    # acceptance below 2**-53 cannot win against a 53-bit uniform
                    if bde > 36.8:
                        continue
                    state, u = _uniform(state)
                    if u >= math.exp(-bde):
                        continue
                step = 1.0 if x[k] == 0 else -1.0
                x[k] = 1 - x[k]
                for p in range(indptr[k], indptr[k + 1]):
                    field_[nbrs[p]] += step * weights[p]
        out[r] = x
    return out


def _csr(bqm: Bqm):
    lin, rows, cols, quad, _ = bqm.to_numpy()
    n = len(bqm)
    src = np.concatenate([rows, cols])
    dst = np.concatenate([cols, rows])
    w = np.concatenate([quad, quad])
    order = np.argsort(src, kind="stable")
    src, dst, w = src[order], dst[order], w[order]
    indptr = np.zeros(n + 1, dtype=np.int64)
    np.add.at(indptr, src + 1, 1)
    return lin, np.cumsum(indptr), dst.astype(np.int64), w


def default_beta_range(bqm: Bqm, seed: int = 0, hot_accept: float = 0.8, cold_accept: float = 1e-4, probes: int = 32):
    """(beta_hot, beta_cold) from flip deltas at random states.

    The hot end accepts a median-sized uphill move with probability
    ``hot_accept``; the cold end accepts the smallest nonzero uphill move with
    probability ``cold_accept``.
    """
    lin, indptr, nbrs, w = _csr(bqm)
    n = len(bqm)
    if n == 0:
        return 1.0, 10.0
    rng = np.random.default_rng(seed)
    deltas = []
    for _ in range(probes):
        x = rng.integers(0, 2, n)
        f = lin.copy()
        for k in np.flatnonzero(x):
            f[nbrs[indptr[k]:indptr[k + 1]]] += w[indptr[k]:indptr[k + 1]]
        deltas.append(np.abs(f))
    d = np.concatenate(deltas)
    d = d[d > 1e-12]
    if d.size == 0:
        return 1.0, 10.0
    hot = -math.log(hot_accept) / float(np.median(d))
    cold = -math.log(cold_accept) / float(d.min())
    if cold <= hot:
        cold = hot * 10
    return hot, cold


def simulated_anneal(bqm: Bqm, params: SaParams = SaParams(), initial_states=None) -> SampleSet:
    """Single-flip Metropolis annealing, ``num_reads`` independent restarts.

    Each sweep visits variables in index order; beta follows a geometric
    schedule with one value per sweep. Reported energies are recomputed
    exactly from the returned assignments.
    """
    t0 = time.perf_counter()
    beta_range = params.beta_range or default_beta_range(bqm, params.seed)
    hot, cold = beta_range
    if params.sweeps_per_read == 1:
        betas = np.array([cold])
    else:
        betas = np.geomspace(hot, cold, params.sweeps_per_read)
    lin, indptr, nbrs, w = _csr(bqm)
    seeds = read_seeds(params.seed, params.num_reads)
    n = len(bqm)
    if initial_states is not None:
        init = np.asarray(initial_states, dtype=np.int8).reshape(params.num_reads, n)
        use_init = True
    else:
        init = np.zeros((1, max(n, 1)), dtype=np.int8)
        use_init = False
    states = _anneal_kernel(lin, indptr, nbrs, w, betas, seeds, init, use_init)
    info = {
        "sampler": "simulated_annealing",
        "params": {**asdict(params), "beta_range": [float(hot), float(cold)]},
        "instance": instance_hash(bqm),
        "elapsed": time.perf_counter() - t0,
    }
    return SampleSet.from_samples(bqm, states, info=info)


def _enumerate(bqm: Bqm, idx: Sequence[int], fixed: Optional[np.ndarray] = None, fixed_idx=(), chunk: int = 1 << 16):
    """Integer energies (scaled) of every assignment to ``idx`` for each row of ``fixed``.

    Returns an array of shape (len(fixed), 2**len(idx)); ``fixed`` rows give
    the values of ``fixed_idx``. All other variables must not interact with
    ``idx`` except through ``fixed_idx``; their contributions are excluded.
    """
    den, lin, r, c, q, off = bqm.scaled
    idx = list(idx)
    pos = {v: k for k, v in enumerate(idx)}
    fpos = {v: k for k, v in enumerate(fixed_idx)}
    m = len(idx)
    bits = ((np.arange(1 << m)[:, None] >> np.arange(m)[None, :]) & 1).astype(np.int64)
    local = bits @ np.array([lin[v] for v in idx], dtype=np.int64) if m else np.zeros(1, dtype=np.int64)
    nf = 1 if fixed is None else len(fixed)
    cross = np.zeros((nf, 1 << m), dtype=np.int64)
    for (u, v), w in zip(zip(r, c), q):
        if u in pos and v in pos:
            local = local + w * bits[:, pos[u]] * bits[:, pos[v]]
        elif u in pos and v in fpos:
            cross += w * np.outer(fixed[:, fpos[v]], bits[:, pos[u]])
        elif v in pos and u in fpos:
            cross += w * np.outer(fixed[:, fpos[u]], bits[:, pos[v]])
    return local[None, :] + cross, bits


def brute_force_ground(bqm: Bqm, max_vars: int = 26, condition_on: Optional[Sequence[int]] = None):
    """Exhaustive minimum energy and every assignment attaining it.

    With ``condition_on`` the listed variables are enumerated exhaustively and,
    for each of their assignments, the remaining interaction graph splits into
    connected components that are each enumerated exhaustively. The guard then
    applies to the conditioned set and to each component separately.

    Returns ``(energy, grounds)`` with ``grounds`` an int8 array of shape
    (count, n) in lexicographic order.
    """
    n = len(bqm)
    den, lin, r, c, q, off = bqm.scaled
    if condition_on is None:
        if n > max_vars:
            raise TooManyVariablesError(f"{n} variables exceed brute-force guard {max_vars}")
        return _plain_ground(bqm)

    cond = sorted(set(condition_on))
    rest = [v for v in range(n) if v not in set(cond)]
    adj = {v: set() for v in rest}
    rs = set(rest)
    for u, v in zip(r, c):
        if u in rs and v in rs:
            adj[u].add(v)
            adj[v].add(u)
    comps, seen = [], set()
    for v in rest:
        if v in seen:
            continue
        stack, comp = [v], []
        seen.add(v)
        while stack:
            a = stack.pop()
            comp.append(a)
            for b in adj[a]:
                if b not in seen:
                    seen.add(b)
                    stack.append(b)
        comps.append(sorted(comp))
    if len(cond) > max_vars or any(len(cp) > max_vars for cp in comps):
        raise TooManyVariablesError("conditioned set or a component exceeds the brute-force guard")

    cond_states = ((np.arange(1 << len(cond))[:, None] >> np.arange(len(cond))[None, :]) & 1).astype(np.int64)
    base, _ = _enumerate(bqm, cond)
    total = base[0] + off
    comp_best = []
    for cp in comps:
        e, bits = _enumerate(bqm, cp, cond_states, cond)
        best = e.min(axis=1)
        comp_best.append((cp, e, bits, best))
        total = total + best
    emin = int(total.min())
    grounds = []
    for s in np.flatnonzero(total == emin):
        choices = []
        for cp, e, bits, best in comp_best:
            choices.append([bits[k] for k in np.flatnonzero(e[s] == best[s])])
        for combo in itertools.product(*choices):
            x = np.zeros(n, dtype=np.int8)
            x[cond] = cond_states[s]
            for cp, bvals in zip(comps, combo):
                x[cp] = bvals
            grounds.append(x)
    grounds = np.array(sorted(grounds, key=tuple), dtype=np.int8).reshape(-1, n)
    return Fraction(emin, den), grounds


def _plain_ground(bqm: Bqm, chunk_bits: int = 18):
    n = len(bqm)
    den, lin, r, c, q, off = bqm.scaled
    lin = np.asarray(lin)
    lo_bits = min(n, chunk_bits)
    hi_bits = n - lo_bits
    low = ((np.arange(1 << lo_bits)[:, None] >> np.arange(lo_bits)[None, :]) & 1).astype(lin.dtype)
    # energy of the low block is shared by every high assignment
    e_low = low @ lin[:lo_bits]
    cross = np.zeros((lo_bits, hi_bits), dtype=lin.dtype)
    hi_pairs = []
    for u, v, w in zip(r, c, q):
        u, v = min(u, v), max(u, v)
        if v < lo_bits:
            e_low = e_low + w * low[:, u] * low[:, v]
        elif u < lo_bits:
            cross[u, v - lo_bits] += w
        else:
            hi_pairs.append((u - lo_bits, v - lo_bits, w))
    best = None
    hits = []
    for hi in range(1 << hi_bits):
        hv = np.array([(hi >> k) & 1 for k in range(hi_bits)], dtype=lin.dtype)
        const = off + hv @ lin[lo_bits:] + sum(w * hv[u] * hv[v] for u, v, w in hi_pairs)
        e = e_low + low @ (cross @ hv) + const if hi_bits else e_low + off
        m = int(e.min())
        if best is None or m <= best:
            sel = low[e == m]
            rows = np.hstack([sel, np.broadcast_to(hv, (len(sel), hi_bits))])
            if best is None or m < best:
                best, hits = m, [rows]
            else:
                hits.append(rows)
    grounds = np.vstack(hits).astype(np.int8)
    grounds = np.array(sorted(grounds.tolist()), dtype=np.int8).reshape(-1, n)
    return Fraction(best, den), grounds


def best_feasible(g: Graph, s: SampleSet):
    """Smallest PMU set among samples whose decision bits dominate ``g``.

    Ties go to the lexicographically smallest sorted node list. Returns
    ``(nodes, size)`` or ``None`` when no sample is feasible.
    """
    if len(s) == 0:
        return None
    x = s.samples[:, : g.node_count].astype(np.int64)
    a = observability_matrix(g)
    ok = ((x @ a.dense().T) >= np.array(a.rhs)).all(axis=1)
    if not ok.any():
        return None
    best = min((sorted(np.flatnonzero(row).tolist()) for row in x[ok]), key=lambda c: (len(c), c))
    return frozenset(best), len(best)
