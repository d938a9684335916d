"""Statevector execution: exact evolution, sampled shots, and the dense oracle.

Three execution paths share the same kernels and RNG streams:

* exact single-pass evolution for unitary circuits (full-precision marginals),
* a per-shot trajectory VM for anything stochastic (noise, mid-circuit
  measurement, repeat-until-success control flow),
* a branch-tree sampler for noiseless circuits without control flow, which
  simulates each distinct measurement/reset history once and replays the
  per-shot decisions on top. It produces bit-identical results to the VM
  while skipping redundant trajectory work.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from qham import backend
from qham.circuit import (
    OP_MEASURE,
    OP_RESET,
    Circuit,
    CircuitError,
    Gate,
    OpTable,
    compile_ops,
    measure,
    state_dtype,
)

DEFAULT_MAX_QUBITS = 26
DENSE_MAX_QUBITS = 6


class SizeError(ValueError):
    """Raised when a request exceeds the simulator's qubit budget."""


@dataclass
class StateVector:
    qubit_count: int
    amplitudes: np.ndarray

    @property
    def dim(self) -> int:
        return 1 << self.qubit_count

    def norm(self) -> float:
        a = self.amplitudes
        return float(np.sqrt(np.sum(a.real * a.real + a.imag * a.imag)))


def init_state(qubit_count: int, max_qubits: int | None = None) -> StateVector:
    """Prepare |0...0> on the requested number of qubits."""
    cap = DEFAULT_MAX_QUBITS if max_qubits is None else max_qubits
    if not 1 <= qubit_count <= cap:
        raise SizeError(f"qubit_count must be in [1, {cap}], got {qubit_count}")
    amps = np.zeros(1 << qubit_count, dtype=np.complex128)
    amps[0] = 1.0
    return StateVector(qubit_count, amps)


def apply_gate(state: StateVector, gate: Gate) -> StateVector:
    """Apply one unitary gate, returning a new StateVector."""
    if gate.kind in ("measure", "reset"):
        raise CircuitError(f"{gate.kind} is not a unitary gate; use run_shot/sample_counts")
    circ = Circuit(state.qubit_count, 0, [gate])
    kr = backend.get_kernels()
    table = compile_ops(circ, state.amplitudes.dtype)
    out = state.amplitudes.copy()
    bad = kr.apply_segment(out, table.code, table.qa, table.qb, table.cth, table.sth, table.mat, 0, 1)
    if bad:
        raise CircuitError(f"cannot apply {gate.kind} as a unitary")
    return StateVector(state.qubit_count, out)


def prob_one(state: StateVector, q: int) -> float:
    """P(|1>) on qubit q."""
    if not 0 <= q < state.qubit_count:
        raise CircuitError(f"qubit {q} out of range")
    kr = backend.get_kernels()
    return float(kr.prob_one_k(state.amplitudes, q))


@dataclass
class ShotOutcome:
    bits: np.ndarray
    failed: bool = False
    marginals: np.ndarray | None = None


def _compiled(circuit: Circuit, noise):
    """(kernels, table, channel arrays, noiseless flag) for one run."""
    from qham import noise as noise_mod

    kr = backend.get_kernels()
    ch_ptr, ch_kind, ch_prob = noise_mod.compile_channels(circuit, noise)
    noiseless = ch_prob.size == 0
    dtype = state_dtype(circuit)
    table = compile_ops(circuit, dtype)
    return kr, table, (ch_ptr, ch_kind, ch_prob), noiseless


def _ensure_measured(circuit: Circuit) -> Circuit:
    """Circuits without explicit measures get a measure-all suffix."""
    if any(g.kind == "measure" for g in circuit.gates):
        return circuit
    out = Circuit(circuit.qubit_count, max(circuit.cbit_count, circuit.qubit_count), list(circuit.gates))
    for q in range(circuit.qubit_count):
        out.add(measure(q, q))
    return out


def run_shots_raw(circuit: Circuit, shots: int, seed: int, noise=None, shot_offset: int = 0, force_vm: bool = False):
    """Sample trajectories; returns (bits[shots, n_cbits], failed[shots])."""
    if shots < 1:
        raise ValueError("shots must be >= 1")
    circuit.validate()
    kr, table, (ch_ptr, ch_kind, ch_prob), noiseless = _compiled(circuit, noise)
    dim = 1 << circuit.qubit_count
    if noiseless and not circuit.has_control_flow and not force_vm:
        return _tree_sample(kr, dim, table, shots, seed, circuit.cbit_count, shot_offset)
    bits, fails = kr.run_shots(
        dim, table.code, table.qa, table.qb, table.cth, table.sth, table.mat,
        ch_ptr, ch_kind, ch_prob, shots, np.uint64(seed), max(circuit.cbit_count, 1), shot_offset,
    )
    return bits[:, : circuit.cbit_count], fails


def _tree_sample(kr, dim, table: OpTable, shots, seed, n_cbits, shot_offset):
    """Noiseless sampler that shares trajectory prefixes across shots.

    Branches only where the VM would consume randomness (measure/reset), so
    each shot's splitmix64 stream advances exactly as in kr.run_shots and the
    sampled bits come out identical.
    """
    code, qa, qb = table.code, table.qa, table.qb
    n_ops = table.n_ops
    suffix = n_ops
    while suffix > 0 and code[suffix - 1] == OP_MEASURE:
        suffix -= 1
    mqs = qa[suffix:]
    mcbs = qb[suffix:]

    bits = np.zeros((shots, max(n_cbits, 1)), dtype=np.uint8)
    rstates = np.empty(shots, dtype=np.uint64)
    for i in range(shots):
        rstates[i] = kr.stream_init(np.uint64(seed), np.uint64(shot_offset + i))

    root = np.zeros(dim, dtype=table.mat.dtype)
    root[0] = 1.0
    stack = [(root, 0, np.arange(shots, dtype=np.int64))]
    while stack:
        state, pc, ids = stack.pop()
        nxt = pc
        while nxt < suffix and code[nxt] != OP_MEASURE and code[nxt] != OP_RESET:
            nxt += 1
        kr.apply_segment(state, code, qa, qb, table.cth, table.sth, table.mat, pc, nxt)
        if nxt >= suffix:
            if n_ops > suffix:
                kr.leaf_sample(state, mqs, mcbs, ids, rstates, bits)
            continue
        q = qa[nxt]
        outcomes = kr.split_shots(state, q, ids, rstates)
        ids0 = ids[outcomes == 0]
        ids1 = ids[outcomes == 1]
        is_measure = code[nxt] == OP_MEASURE
        for outcome, sub in ((1, ids1), (0, ids0)):
            if sub.size == 0:
                continue
            branch = state.copy() if (ids0.size and ids1.size and outcome == 1) else state
            kr.collapse_k(branch, q, outcome)
            if not is_measure and outcome == 1:
                kr.apply_x_k(branch, q)
            if is_measure:
                bits[sub, qb[nxt]] = outcome
            stack.append((branch, nxt + 1, sub))
    return bits[:, :n_cbits], np.zeros(shots, dtype=np.uint8)


def run_shot(circuit: Circuit, seed: int, noise=None, shot_index: int = 0) -> ShotOutcome:
    """Execute a single trajectory on substream `shot_index` of `seed`."""
    circ = _ensure_measured(circuit)
    bits, fails = run_shots_raw(circ, 1, seed, noise, shot_offset=shot_index, force_vm=True)
    return ShotOutcome(bits=bits[0], failed=bool(fails[0]))


def sample_counts(circuit: Circuit, shots: int, seed: int, noise=None) -> dict[str, int]:
    """Histogram of recorded bitstrings (cbit 0 printed first) over `shots` trajectories."""
    circ = _ensure_measured(circuit)
    bits, _ = run_shots_raw(circ, shots, seed, noise)
    return counts_from_bits(bits)


def counts_from_bits(bits: np.ndarray) -> dict[str, int]:
    rows, counts = np.unique(bits, axis=0, return_counts=True)
    return {"".join(str(int(b)) for b in row): int(c) for row, c in zip(rows, counts)}


def exact_state(circuit: Circuit) -> StateVector:
    """Evolve a unitary circuit exactly (measures allowed only as a terminal suffix)."""
    table = compile_ops(circuit, state_dtype(circuit))
    code = table.code
    end = table.n_ops
    while end > 0 and code[end - 1] == OP_MEASURE:
        end -= 1
    if np.any(code[:end] == OP_MEASURE) or np.any(code[:end] == OP_RESET):
        raise CircuitError("exact evolution requires a circuit without mid-circuit measure/reset")
    kr = backend.get_kernels()
    state = np.zeros(1 << circuit.qubit_count, dtype=table.mat.dtype)
    state[0] = 1.0
    bad = kr.apply_segment(state, code, table.qa, table.qb, table.cth, table.sth, table.mat, 0, end)
    if bad:
        raise CircuitError("non-unitary op in exact segment")
    return StateVector(circuit.qubit_count, state.astype(np.complex128))


_MAT1 = {
    "x": lambda a: np.array([[0, 1], [1, 0]], dtype=complex),
    "sx": lambda a: 0.5 * np.array([[1 + 1j, 1 - 1j], [1 - 1j, 1 + 1j]]),
    "id": lambda a: np.eye(2, dtype=complex),
    "rz": lambda a: np.array([[np.exp(-0.5j * a), 0], [0, np.exp(0.5j * a)]]),
    "ry": lambda a: np.array(
        [[math.cos(a / 2), -math.sin(a / 2)], [math.sin(a / 2), math.cos(a / 2)]], dtype=complex
    ),
}
_Y = np.array([[0, -1j], [1j, 0]])


def _embed_1q(m: np.ndarray, q: int, nq: int, control: int | None = None) -> np.ndarray:
    dim = 1 << nq
    full = np.zeros((dim, dim), dtype=complex)
    kq = 1 << q
    for col in range(dim):
        if control is not None and not (col >> control) & 1:
            full[col, col] = 1.0
            continue
        b = (col >> q) & 1
        base = col & ~kq
        full[base, col] += m[0, b]
        full[base | kq, col] += m[1, b]
    return full


def _gate_dense(g: Gate, nq: int) -> np.ndarray:
    if g.kind in _MAT1:
        return _embed_1q(_MAT1[g.kind](g.angle), g.qubits[0], nq)
    if g.kind == "cnot":
        return _embed_1q(_MAT1["x"](None), g.qubits[1], nq, control=g.qubits[0])
    if g.kind == "cry":
        return _embed_1q(_MAT1["ry"](g.angle), g.qubits[1], nq, control=g.qubits[0])
    if g.kind == "cy":
        return _embed_1q(_Y, g.qubits[1], nq, control=g.qubits[0])
    if g.kind == "swap":
        a, b = g.qubits
        dim = 1 << nq
        full = np.zeros((dim, dim), dtype=complex)
        for col in range(dim):
            ba, bb = (col >> a) & 1, (col >> b) & 1
            row = col if ba == bb else col ^ ((1 << a) | (1 << b))
            full[row, col] = 1.0
        return full
    raise CircuitError(f"{g.kind} has no dense unitary")


def dense_unitary(circuit: Circuit) -> np.ndarray:
    """Full-dimension matrix product of the circuit's gates, as a test oracle."""
    if circuit.qubit_count > DENSE_MAX_QUBITS:
        raise SizeError(f"dense_unitary supports at most {DENSE_MAX_QUBITS} qubits")
    if circuit.has_nonunitary or circuit.has_control_flow:
        raise CircuitError("dense_unitary requires a purely unitary circuit")
    dim = 1 << circuit.qubit_count
    total = np.eye(dim, dtype=complex)
    for g in circuit.gates:
        total = _gate_dense(g, circuit.qubit_count) @ total
    return total


def phase_distance(a: np.ndarray, b: np.ndarray) -> float:
    """Max elementwise distance between matrices after removing one global phase."""
    idx = np.unravel_index(np.argmax(np.abs(b)), b.shape)
    if abs(b[idx]) == 0:
        return float(np.max(np.abs(a - b)))
    phase = a[idx] / b[idx]
    if abs(phase) == 0:
        return float(np.max(np.abs(a - b)))
    phase /= abs(phase)
    return float(np.max(np.abs(a - phase * b)))
