"""Hebbian training, probe encoding, recall execution and accuracy metrics.

A recall run encodes the probe qubit-per-entry, applies one neuron update per
scheduled target (controls are all other data qubits, weights from the
target's row), and measures every data qubit. Ancilla handling follows the
schedule's mode: a fresh ancilla per update, or one ancilla recycled through
resets.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from enum import Enum

import numpy as np

from qham import neuron, simulator
from qham.circuit import Circuit, Gate, measure, reset, ry
from qham.simulator import SizeError

QUARTER_PI = math.pi / 4.0


class AncillaMode(Enum):
    FRESH = "fresh"
    RESET = "reset"


@dataclass
class UpdateSchedule:
    targets: list[int]
    ancilla_mode: AncillaMode = AncillaMode.RESET


@dataclass
class WeightMatrix:
    n: int
    w: np.ndarray

    def __post_init__(self):
        self.w = np.asarray(self.w, dtype=np.float64)
        if self.w.shape != (self.n, self.n):
            raise ValueError(f"weight matrix must be {self.n}x{self.n}")
        if not np.allclose(self.w, self.w.T):
            raise ValueError("weight matrix must be symmetric")
        if np.any(np.diag(self.w) != 0):
            raise ValueError("weight matrix must have a zero diagonal")

    @property
    def w_max(self) -> float:
        if self.n < 2:
            return 0.0
        off = self.w[~np.eye(self.n, dtype=bool)]
        return float(np.max(np.abs(off)))


def _as_pattern(p) -> np.ndarray:
    arr = np.asarray(p)
    if arr.ndim != 1 or arr.size < 1:
        raise ValueError("pattern must be a non-empty vector")
    if not np.all(np.isin(arr, (-1, 1))):
        raise ValueError("pattern entries must be -1 or +1")
    return arr.astype(np.int64)


def _as_probe(p) -> np.ndarray:
    arr = np.asarray(p, dtype=np.float64)
    if arr.ndim != 1 or arr.size < 1:
        raise ValueError("probe must be a non-empty vector")
    if np.any(np.abs(arr) > 1.0 + 1e-12):
        raise ValueError("probe entries must lie in [-1, 1]")
    return arr


def hebbian(patterns) -> WeightMatrix:
    """w_ij = (1/m) * sum_mu e_i e_j with a zero diagonal."""
    pats = [_as_pattern(p) for p in patterns]
    if not pats:
        raise ValueError("need at least one pattern")
    n = pats[0].size
    if any(p.size != n for p in pats):
        raise ValueError("patterns must all have the same length")
    eps = np.stack(pats).astype(np.float64)
    w = eps.T @ eps / len(pats)
    np.fill_diagonal(w, 0.0)
    return WeightMatrix(n, w)


def encode(probe) -> list[Gate]:
    """Per entry x: Ry(2*(x*pi/4 + pi/4)) maps -1/0/+1 to |0>, |+>-like, |1>."""
    arr = _as_probe(probe)
    return [ry(i, 2.0 * (x * QUARTER_PI + QUARTER_PI)) for i, x in enumerate(arr)]


def classical_update(x, w: WeightMatrix, i: int, h_i: float = 0.0) -> int:
    """Threshold rule: +1 iff sum_j w_ij x_j > h_i, else -1 (strict)."""
    theta = float(np.dot(w.w[i], np.asarray(x, dtype=np.float64)))
    return 1 if theta > h_i else -1


def energy(x, w: WeightMatrix, h=None) -> float:
    """E = -1/2 sum_ij w_ij x_i x_j + sum_i h_i x_i."""
    xv = np.asarray(x, dtype=np.float64)
    hv = np.zeros_like(xv) if h is None else np.asarray(h, dtype=np.float64)
    return float(-0.5 * xv @ w.w @ xv + hv @ xv)


def qubit_overhead(n: int, u: int, mode: AncillaMode) -> int:
    """Qubits required for a recall: n+1 with ancilla reuse, n+u without."""
    if n < 1 or u < 0:
        raise ValueError("need n >= 1 and u >= 0")
    return n + 1 if mode is AncillaMode.RESET else n + u


def majority_vote(counts_or_ones, shots: int) -> list[int]:
    """Per-qubit majority: 1 iff ones > shots/2 (an exact tie reads as 0).

    Accepts a bitstring histogram or a per-qubit ones count (ints or
    expected counts as floats).
    """
    if shots < 1:
        raise ValueError("shots must be >= 1")
    if isinstance(counts_or_ones, dict):
        ones = None
        for key, c in counts_or_ones.items():
            if ones is None:
                ones = np.zeros(len(key), dtype=np.float64)
            for i, ch in enumerate(key):
                if ch == "1":
                    ones[i] += c
        if ones is None:
            raise ValueError("empty histogram")
    else:
        ones = np.asarray(counts_or_ones, dtype=np.float64)
    return [1 if o > shots / 2.0 else 0 for o in ones]


def density_accuracy(per_qubit_p1, target) -> float:
    """Mean per-qubit probability of reading the target bit value."""
    p1 = np.asarray(per_qubit_p1, dtype=np.float64)
    tgt = _as_pattern(target)
    if p1.size != tgt.size:
        raise ValueError("length mismatch between probabilities and target")
    return float(np.mean(np.where(tgt == 1, p1, 1.0 - p1)))


def pattern_bits(pattern) -> list[int]:
    """+1 -> 1, -1 -> 0, read qubit-0-first."""
    return [1 if e == 1 else 0 for e in _as_pattern(pattern)]


@dataclass
class RecallResult:
    per_qubit_p1: np.ndarray
    counts: dict[str, int]
    majority_vote: list[int]
    shots: int
    exact: bool


def append_fragment(circuit: Circuit, gates: list[Gate]):
    """Append a fragment, rebasing relative jump targets to absolute pcs."""
    base = len(circuit.gates)
    for g in gates:
        if g.kind in ("jz", "jmp"):
            g = Gate(g.kind, (), cbit=g.cbit, target_pc=g.target_pc + base)
        circuit.add(g)


def build_recall_circuit(
    probe,
    weights: WeightMatrix,
    schedule: UpdateSchedule,
    max_qubits: int = simulator.DEFAULT_MAX_QUBITS,
    include_encode: bool = True,
    include_measure: bool = True,
) -> Circuit:
    """Encode + scheduled neuron updates + final data-qubit measurement."""
    probe_arr = _as_probe(probe)
    n = probe_arr.size
    if weights.n != n:
        raise ValueError("probe length does not match weight matrix")
    u = len(schedule.targets)
    if any(not 0 <= t < n for t in schedule.targets):
        raise ValueError("schedule targets out of range")
    budget = qubit_overhead(n, u, schedule.ancilla_mode)
    if budget > max_qubits:
        raise SizeError(f"recall needs {budget} qubits, cap is {max_qubits}")

    fresh = schedule.ancilla_mode is AncillaMode.FRESH
    n_anc = u if fresh else (1 if u > 0 else 0)
    circ = Circuit(max(n + n_anc, 1), n)
    if include_encode:
        circ.extend(encode(probe_arr))
    if u > 0:
        gam = neuron.gamma(weights.w_max, n)
        for k, tgt in enumerate(schedule.targets):
            anc = n + k if fresh else n
            plan = neuron.NeuronPlan(
                target=tgt,
                ancilla=anc,
                gamma=gam,
                beta=neuron.beta(weights.w[tgt], gam),
                controls=[(j, float(weights.w[tgt, j])) for j in range(n) if j != tgt],
            )
            circ.extend(neuron.build_simplified_neuron(plan))
            # Recycled ancilla must return to |0>; the trailing reset after the
            # last update would be unobservable and is elided.
            if not fresh and k < u - 1:
                circ.add(reset(anc))
    if include_measure:
        for q in range(n):
            circ.add(measure(q, q))
    return circ


def run_recall(
    probe,
    weights: WeightMatrix,
    schedule: UpdateSchedule,
    shots: int,
    seed: int,
    noise=None,
    max_qubits: int = simulator.DEFAULT_MAX_QUBITS,
) -> RecallResult:
    """Execute a recall; exact marginals when nothing collapses mid-circuit."""
    circ = build_recall_circuit(probe, weights, schedule, max_qubits)
    n = len(_as_probe(probe))
    mid_collapse = any(g.kind == "reset" for g in circ.gates)
    bits, _ = simulator.run_shots_raw(circ, shots, seed, noise)
    counts = simulator.counts_from_bits(bits)
    if noise is None and not mid_collapse:
        state = simulator.exact_state(circ)
        p1 = np.array([simulator.prob_one(state, q) for q in range(n)])
        vote = majority_vote(p1 * shots, shots)
        return RecallResult(p1, counts, vote, shots, exact=True)
    p1 = bits.mean(axis=0)
    vote = majority_vote(bits.sum(axis=0), shots)
    return RecallResult(p1, counts, vote, shots, exact=False)
