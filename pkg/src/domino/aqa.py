"""State-vector simulation of a closed-system transverse-field anneal.

The Hamiltonian is ``H(t) = -A(t) * sum_j X_j + B(t) * E(s)`` where ``E`` is an
:class:`~domino.reform.IsingModel` evaluated at ``s = 1 - 2x`` and bit ``j`` of a
basis index is ``x_j``. Time is dimensionless with hbar = 1.
"""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass, field
from typing import Iterable, Optional, Sequence, TextIO

import numpy as np

from .reform import Bqm, IsingModel
from .sa import SampleSet

__all__ = [
    "MAX_QUBITS",
    "QubitLimitError",
    "Schedule",
    "EvolveResult",
    "init_plus_state",
    "diagonal",
    "apply_hamiltonian",
    "evolve",
    "measure_probabilities",
    "ground_probability",
    "expected_energy",
    "sample_reads",
    "tau_sweep",
    "write_curve",
]

MAX_QUBITS = 20
# RK4 on an imaginary eigenvalue i*y loses about y**6 / 72 of norm per step;
# the automatic step count keeps the whole run under this budget
_DRIFT_BUDGET = 1e-7
# RK4 is unstable on the imaginary axis beyond 2*sqrt(2)
_STABILITY = 2.0 * math.sqrt(2.0)
# below this size a dense mixer matrix beats the reshape-and-flip loop
_DENSE_MAX = 10


class QubitLimitError(ValueError):
    pass


def _check_n(n: int):
    if not 1 <= n <= MAX_QUBITS:
        raise QubitLimitError(f"state vectors support 1..{MAX_QUBITS} qubits, got {n}")


@dataclass(frozen=True)
class Schedule:
    """Linear ramps ``A(t) = a0 (1 - t/tau)`` and ``B(t) = b0 t/tau``.

    ``steps=None`` lets :func:`evolve` pick a count from the drift budget.
    """

    tau: float
    steps: Optional[int] = None
    a0: float = 1.0
    b0: float = 1.0

    def __post_init__(self):
        if self.tau < 0:
            raise ValueError("tau must be nonnegative")
        if self.a0 <= 0 or self.b0 <= 0:
            raise ValueError("a0 and b0 must be positive")
        if self.steps is not None and self.steps < 0:
            raise ValueError("steps must be nonnegative")

    def coefficients(self, t: float) -> tuple[float, float]:
        if self.tau == 0:
            return self.a0, 0.0
        f = t / self.tau
        return self.a0 * (1.0 - f), self.b0 * f


def init_plus_state(n: int) -> np.ndarray:
    """Uniform superposition over all 2**n bit strings."""
    _check_n(n)
    return np.full(1 << n, 2.0 ** (-n / 2), dtype=np.complex128)


def _exact_diagonal(m: IsingModel) -> tuple[int, np.ndarray]:
    n = m.num_variables
    _check_n(n)
    den, h, rows, cols, j, off = m.scaled
    idx = np.arange(1 << n, dtype=np.int64)
    spins = 1 - 2 * ((idx[:, None] >> np.arange(n)) & 1)
    num = off + spins @ h
    if len(j):
        num = num + (spins[:, rows] * spins[:, cols]) @ j
    return den, num


def diagonal(m: IsingModel) -> np.ndarray:
    """Ising energy of every basis state as floats."""
    den, num = _exact_diagonal(m)
    return num / den


def _mixer(psi: np.ndarray, n: int) -> np.ndarray:
    """sum_j X_j psi, i.e. the sum over single-bit flips."""
    # C-order axis a holds bit n-1-a
    t = psi.reshape((2,) * n)
    out = np.zeros_like(t)
    for axis in range(n):
        out += np.flip(t, axis=axis)
    return out.reshape(-1)


def _apply(diag: np.ndarray, n: int, a: float, b: float, psi: np.ndarray) -> np.ndarray:
    out = b * diag * psi
    if a:
        out -= a * _mixer(psi, n)
    return out


def apply_hamiltonian(m: IsingModel, a_coef: float, b_coef: float, psi: np.ndarray) -> np.ndarray:
    """Matrix-free ``(-a_coef * sum X + b_coef * E) psi``."""
    n = m.num_variables
    _check_n(n)
    psi = np.asarray(psi, dtype=np.complex128)
    if psi.shape != (1 << n,):
        raise ValueError(f"state has {psi.size} amplitudes, model needs {1 << n}")
    return _apply(diagonal(m), n, a_coef, b_coef, psi)


@dataclass
class EvolveResult:
    psi: np.ndarray
    steps: int
    drift: float  # summed |norm - 1| before each renormalization
    info: dict = field(default_factory=dict)


def _norm_bound(diag: np.ndarray, n: int, s: Schedule) -> float:
    return n * s.a0 + s.b0 * float(np.abs(diag).max())


def _auto_steps(bound: float, tau: float) -> int:
    if tau == 0:
        return 0
    y = (72.0 * _DRIFT_BUDGET / (tau * bound)) ** 0.2
    return max(1, math.ceil(tau * bound / min(y, 0.5)))


def evolve(m: IsingModel, s: Schedule, psi0: Optional[np.ndarray] = None) -> EvolveResult:
    """Integrate ``d psi/dt = -i H(t) psi`` with fixed-step RK4.

    The state is renormalized after every step and the accumulated
    correction is returned as ``drift``.
    """
    n = m.num_variables
    _check_n(n)
    psi = init_plus_state(n) if psi0 is None else np.array(psi0, dtype=np.complex128)
    if psi.shape != (1 << n,):
        raise ValueError(f"state has {psi.size} amplitudes, model needs {1 << n}")
    diag = diagonal(m)
    bound = _norm_bound(diag, n, s)
    steps = _auto_steps(bound, s.tau) if s.steps is None else s.steps
    if s.tau == 0 or steps == 0:
        if s.tau > 0:
            raise ValueError("a positive tau needs at least one step")
        return EvolveResult(psi, 0, 0.0, {"bound": bound})
    dt = s.tau / steps
    if dt * bound > _STABILITY:
        floor = math.ceil(s.tau * bound / _STABILITY)
        raise ValueError(f"{steps} steps is below the stability floor of {floor}")

    if n <= _DENSE_MAX:
        eye = np.eye(1 << n, dtype=np.complex128)
        mix = np.stack([_mixer(col, n) for col in eye], axis=1)

        def rhs(t, v):
            a, b = s.coefficients(t)
            return -1j * (b * diag * v - a * (mix @ v))

    else:

        def rhs(t, v):
            a, b = s.coefficients(t)
            return -1j * _apply(diag, n, a, b, v)

    drift = 0.0
    for k in range(steps):
        t = k * dt
        k1 = rhs(t, psi)
        k2 = rhs(t + dt / 2, psi + dt / 2 * k1)
        k3 = rhs(t + dt / 2, psi + dt / 2 * k2)
        k4 = rhs(t + dt, psi + dt * k3)
        psi = psi + dt / 6 * (k1 + 2 * k2 + 2 * k3 + k4)
        norm = float(np.sqrt(np.vdot(psi, psi).real))
        drift += abs(norm - 1.0)
        psi /= norm
    return EvolveResult(psi, steps, drift, {"bound": bound, "dt": dt})


def measure_probabilities(psi: np.ndarray) -> np.ndarray:
    p = np.abs(np.asarray(psi)) ** 2
    return p / p.sum()


def ground_probability(m: IsingModel, psi: np.ndarray) -> float:
    """Probability mass on the exact ground manifold."""
    _, num = _exact_diagonal(m)
    return float(measure_probabilities(psi)[num == num.min()].sum())


def expected_energy(m: IsingModel, psi: np.ndarray) -> float:
    return float(measure_probabilities(psi) @ diagonal(m))


def sample_reads(psi: np.ndarray, k: int, seed: int = 0, model=None) -> SampleSet:
    """``k`` independent computational-basis reads of ``psi``.

    With a :class:`Bqm` or :class:`IsingModel` the records carry exact
    energies, otherwise the energy column is ``None``.
    """
    p = measure_probabilities(psi)
    n = int(round(math.log2(len(p))))
    rng = np.random.default_rng(seed)
    idx = rng.choice(len(p), size=k, p=p) if k else np.zeros(0, dtype=np.int64)
    states = ((idx[:, None] >> np.arange(n)) & 1).astype(np.int8)
    info = {"sampler": "aqa", "seed": seed, "num_reads": k}
    if isinstance(model, Bqm):
        return SampleSet.from_samples(model, states, info=info)
    if k == 0:
        return SampleSet.from_samples(None, np.zeros((0, n), dtype=np.int8), info=info)
    uniq, counts = np.unique(states, axis=0, return_counts=True)
    if isinstance(model, IsingModel):
        e = model.energies(1 - 2 * uniq.astype(np.int64))
    else:
        e = [None] * len(uniq)
    order = sorted(range(len(uniq)), key=lambda i: (e[i] is None, e[i] or 0, tuple(uniq[i])))
    return SampleSet(uniq[order], [e[i] for i in order], counts[order], info)


def tau_sweep(m: IsingModel, taus: Iterable[float], a0: float = 1.0, b0: float = 1.0) -> list[dict]:
    """Ground probability and mean energy after one anneal per ``tau``."""
    rows = []
    for tau in taus:
        r = evolve(m, Schedule(float(tau), a0=a0, b0=b0))
        rows.append(
            {
                "tau": tau,
                "steps": r.steps,
                "p_ground": ground_probability(m, r.psi),
                "mean_energy": expected_energy(m, r.psi),
                "drift": r.drift,
            }
        )
    return rows


def write_curve(rows: Sequence[dict], out: Optional[TextIO] = None, delimiter: str = ",") -> str:
    """Delimited text with a header row; also returned as a string."""
    buf = io.StringIO()
    if rows:
        w = csv.DictWriter(buf, fieldnames=list(rows[0]), delimiter=delimiter, lineterminator="\n")
        w.writeheader()
        w.writerows(rows)
    text = buf.getvalue()
    if out is not None:
        out.write(text)
    return text
