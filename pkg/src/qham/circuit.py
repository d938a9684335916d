"""Gate and circuit types plus compilation to flat op tables for the kernels.

Convention used everywhere: qubit 0 is the least-significant bit of the
amplitude index, and bitstrings are printed qubit-0-first.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

# Opcodes shared by both kernel backends.
OP_X = 0
OP_SX = 1
OP_ID = 2
OP_RZ = 3
OP_RY = 4
OP_CNOT = 5
OP_CRY = 6
OP_CY = 7
OP_SWAP = 8
OP_MEASURE = 9
OP_RESET = 10
OP_JZ = 11  # jump to pc=b when cbit a reads 0
OP_JMP = 12  # unconditional jump to pc=b
OP_MARK_FAIL = 13

_OPCODE = {
    "x": OP_X,
    "sx": OP_SX,
    "id": OP_ID,
    "rz": OP_RZ,
    "ry": OP_RY,
    "cnot": OP_CNOT,
    "cry": OP_CRY,
    "cy": OP_CY,
    "swap": OP_SWAP,
    "measure": OP_MEASURE,
    "reset": OP_RESET,
    "jz": OP_JZ,
    "jmp": OP_JMP,
    "mark_fail": OP_MARK_FAIL,
}

# Stochastic channel kinds shared by the kernel backends (see noise module).
CH_DEPOL1_A = 0
CH_DEPOL1_B = 1
CH_DEPOL2 = 2
CH_DAMP_A = 3
CH_DAMP_B = 4
CH_DEPH_A = 5
CH_DEPH_B = 6
CH_READOUT = 7

UNITARY_KINDS = frozenset({"x", "sx", "id", "rz", "ry", "cnot", "cry", "cy", "swap"})
TWO_QUBIT_KINDS = frozenset({"cnot", "cry", "cy", "swap"})
# Gates whose matrices are real (up to the global phase we never track), so a
# circuit built only from these can run on a float64 statevector.
REAL_KINDS = frozenset({"x", "id", "ry", "cnot", "cry", "swap", "measure", "reset", "jz", "jmp", "mark_fail"})


class CircuitError(ValueError):
    """Raised for malformed gates or circuits."""


@dataclass(frozen=True)
class Gate:
    kind: str
    qubits: tuple[int, ...]
    angle: float | None = None
    cbit: int | None = None
    target_pc: int | None = None  # jumps only

    def __post_init__(self):
        if self.kind not in _OPCODE:
            raise CircuitError(f"unknown gate kind {self.kind!r}")
        if any(q < 0 for q in self.qubits):
            raise CircuitError(f"negative qubit index in {self}")
        if self.angle is not None and not math.isfinite(self.angle):
            raise CircuitError(f"non-finite angle in {self.kind}")
        if self.kind in TWO_QUBIT_KINDS and self.qubits[0] == self.qubits[1]:
            raise CircuitError(f"{self.kind} needs two distinct qubits, got {self.qubits}")


def x(q: int) -> Gate:
    return Gate("x", (q,))


def sx(q: int) -> Gate:
    return Gate("sx", (q,))


def idg(q: int) -> Gate:
    return Gate("id", (q,))


def rz(q: int, angle: float) -> Gate:
    return Gate("rz", (q,), angle=angle)


def ry(q: int, angle: float) -> Gate:
    return Gate("ry", (q,), angle=angle)


def cnot(control: int, target: int) -> Gate:
    return Gate("cnot", (control, target))


def cry(control: int, target: int, angle: float) -> Gate:
    return Gate("cry", (control, target), angle=angle)


def cy(control: int, target: int) -> Gate:
    return Gate("cy", (control, target))


def swap(a: int, b: int) -> Gate:
    return Gate("swap", (a, b))


def measure(q: int, cbit: int) -> Gate:
    return Gate("measure", (q,), cbit=cbit)


def reset(q: int) -> Gate:
    return Gate("reset", (q,))


@dataclass
class Circuit:
    qubit_count: int
    cbit_count: int = 0
    gates: list[Gate] = field(default_factory=list)

    def __post_init__(self):
        if self.qubit_count < 1:
            raise CircuitError("circuit needs at least one qubit")
        for g in self.gates:
            self._check(g)

    def _check(self, g: Gate):
        for q in g.qubits:
            if q >= self.qubit_count:
                raise CircuitError(f"qubit {q} out of range for {self.qubit_count}-qubit circuit")
        if g.cbit is not None and g.cbit >= self.cbit_count:
            raise CircuitError(f"cbit {g.cbit} out of range for {self.cbit_count} cbits")

    def add(self, gate: Gate) -> "Circuit":
        self._check(gate)
        self.gates.append(gate)
        return self

    def extend(self, gates) -> "Circuit":
        for g in gates:
            self.add(g)
        return self

    @property
    def has_nonunitary(self) -> bool:
        return any(g.kind in ("measure", "reset") for g in self.gates)

    @property
    def has_control_flow(self) -> bool:
        return any(g.kind in ("jz", "jmp", "mark_fail") for g in self.gates)

    @property
    def real_safe(self) -> bool:
        """True when every gate keeps a real statevector real."""
        return all(g.kind in REAL_KINDS for g in self.gates)

    def measured_cbits(self) -> list[int]:
        return [g.cbit for g in self.gates if g.kind == "measure"]

    def validate(self):
        """Full consistency check, including the one-writer-per-cbit rule."""
        seen = set()
        for g in self.gates:
            self._check(g)
            if g.kind == "measure":
                if g.cbit in seen:
                    raise CircuitError(f"cbit {g.cbit} written by more than one measure")
                seen.add(g.cbit)
            if g.kind in ("jz", "jmp") and not (0 <= g.target_pc <= len(self.gates)):
                raise CircuitError(f"jump target {g.target_pc} out of range")
        return self


@dataclass
class OpTable:
    """Flat arrays consumed by the kernel VMs.

    ``mat`` holds per-op 2x2 matrix entries in the statevector dtype (used by
    rz/sx/cy); ``cth``/``sth`` hold cos/sin half-angles for ry/cry.
    """

    code: np.ndarray
    qa: np.ndarray
    qb: np.ndarray
    cth: np.ndarray
    sth: np.ndarray
    mat: np.ndarray
    n_ops: int


_SX_MAT = 0.5 * np.array([1 + 1j, 1 - 1j, 1 - 1j, 1 + 1j], dtype=np.complex128)
_Y_MAT = np.array([0, -1j, 1j, 0], dtype=np.complex128)


def compile_ops(circuit: Circuit, dtype) -> OpTable:
    """Lower a circuit to the flat op representation for the given state dtype."""
    n = len(circuit.gates)
    code = np.zeros(n, dtype=np.int64)
    qa = np.zeros(n, dtype=np.int64)
    qb = np.zeros(n, dtype=np.int64)
    cth = np.zeros(n, dtype=np.float64)
    sth = np.zeros(n, dtype=np.float64)
    mat = np.zeros((n, 4), dtype=dtype)
    complex_mode = np.issubdtype(dtype, np.complexfloating)

    for i, g in enumerate(circuit.gates):
        code[i] = _OPCODE[g.kind]
        if g.qubits:
            qa[i] = g.qubits[0]
        if len(g.qubits) > 1:
            qb[i] = g.qubits[1]
        if g.kind in ("ry", "cry"):
            cth[i] = math.cos(g.angle / 2.0)
            sth[i] = math.sin(g.angle / 2.0)
        elif g.kind == "rz":
            if not complex_mode:
                raise CircuitError("rz requires a complex statevector")
            h = g.angle / 2.0
            mat[i, 0] = complex(math.cos(h), -math.sin(h))
            mat[i, 3] = complex(math.cos(h), math.sin(h))
        elif g.kind == "sx":
            if not complex_mode:
                raise CircuitError("sx requires a complex statevector")
            mat[i] = _SX_MAT
        elif g.kind == "cy":
            if not complex_mode:
                raise CircuitError("cy requires a complex statevector")
            mat[i] = _Y_MAT
        elif g.kind == "measure":
            qb[i] = g.cbit
        elif g.kind == "jz":
            qa[i] = g.cbit
            qb[i] = g.target_pc
        elif g.kind == "jmp":
            qb[i] = g.target_pc

    return OpTable(code=code, qa=qa, qb=qb, cth=cth, sth=sth, mat=mat, n_ops=n)


def state_dtype(circuit: Circuit, noise_real_safe: bool = True):
    """float64 when the whole run stays real, complex128 otherwise."""
    if circuit.real_safe and noise_real_safe:
        return np.float64
    return np.complex128
