"""Quantum neuron circuit builders and their analytic activation functions.

Two designs share one angle scheme: a bias rotation Ry(2*beta) plus one
CRy(4*gamma*w_ij) per control realizes a total rotation Ry(2*phi) on the
rotation qubit for every classical control configuration, with
phi = gamma*theta + pi/4 and theta the signed weighted control sum.

The plain design rotates an ancilla and swaps it onto the target, giving
P(|1>) = sin^2(phi). The repeat-until-success design runs the rotation chain
forward onto an input qubit, entangles it with the output via CY + Rz (a
controlled Ry(pi) up to phase), uncomputes the chain, and measures the input:
outcome 0 leaves the output rotated by the sharpened activation
sin^4 / (sin^4 + cos^4); outcome 1 leaves a Ry(pi/2) kick that is undone
before retrying.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from enum import Enum

from qham.circuit import Gate, cry, cy, measure, reset, ry, rz, swap

QUARTER_PI = math.pi / 4.0


class DegenerateWeights(ValueError):
    """All-zero weight row/matrix: the rotation normalization is undefined."""


class NormalizationViolation(ValueError):
    """phi fell outside [0, pi/2], so gamma was not a valid normalization."""


class ActivationKind(Enum):
    SIMPLIFIED = "simplified"
    RUS = "rus"


def gamma(w_max: float, n: int) -> float:
    """Rotation normalization: (pi/4) / (w_max * n)."""
    if n < 1:
        raise ValueError("n must be >= 1")
    if w_max <= 0:
        raise DegenerateWeights("w_max must be positive (all-zero weights cannot be normalized)")
    return QUARTER_PI / (w_max * n)


def beta(weights_row, gamma_: float) -> float:
    """Bias angle pi/4 - gamma * sum(row)."""
    return QUARTER_PI - gamma_ * float(sum(weights_row))


def phi(theta: float, gamma_: float) -> float:
    """Map a classical input signal to the rotation half-angle gamma*theta + pi/4."""
    out = gamma_ * theta + QUARTER_PI
    if not -1e-12 <= out <= math.pi / 2.0 + 1e-12:
        raise NormalizationViolation(f"phi={out} outside [0, pi/2]; check gamma normalization")
    return min(max(out, 0.0), math.pi / 2.0)


def activation(kind: ActivationKind, phi_: float) -> float:
    """Analytic P(|1>) of either neuron at rotation half-angle phi."""
    if not 0.0 <= phi_ <= math.pi / 2.0:
        raise ValueError(f"phi={phi_} outside [0, pi/2]")
    if kind is ActivationKind.SIMPLIFIED:
        return math.sin(phi_) ** 2
    s4 = math.sin(phi_) ** 4
    c4 = math.cos(phi_) ** 4
    return s4 / (s4 + c4)


@dataclass
class NeuronPlan:
    target: int
    ancilla: int
    gamma: float
    beta: float
    controls: list[tuple[int, float]] = field(default_factory=list)
    rus_input: int | None = None

    def __post_init__(self):
        qubits = [q for q, _ in self.controls]
        if len(set(qubits)) != len(qubits):
            raise ValueError("duplicate control qubits")
        special = {self.target, self.ancilla}
        if self.rus_input is not None:
            special.add(self.rus_input)
        if len(special) != (2 if self.rus_input is None else 3):
            raise ValueError("target/ancilla/rus_input must be distinct")
        if special & set(qubits):
            raise ValueError("controls must not include the target, ancilla or rus input")
        if self.gamma <= 0:
            raise DegenerateWeights("plan gamma must be positive")

    def _ordered(self):
        return sorted(self.controls, key=lambda cw: cw[0])


def build_simplified_neuron(plan: NeuronPlan) -> list[Gate]:
    """One update: bias + per-control rotations onto the ancilla, then SWAP to target."""
    gates = [ry(plan.ancilla, 2.0 * plan.beta)]
    for q, w in plan._ordered():
        gates.append(cry(q, plan.ancilla, 4.0 * plan.gamma * w))
    gates.append(swap(plan.ancilla, plan.target))
    return gates


def _rus_chain(plan: NeuronPlan, sign: float) -> list[Gate]:
    """Rotation chain Ry(2*phi) (sign=+1) or its inverse (sign=-1) on the input qubit."""
    q_in = plan.rus_input
    if sign > 0:
        gates = [ry(q_in, 2.0 * plan.beta)]
        gates += [cry(q, q_in, 4.0 * plan.gamma * w) for q, w in plan._ordered()]
    else:
        gates = [cry(q, q_in, -4.0 * plan.gamma * w) for q, w in reversed(plan._ordered())]
        gates.append(ry(q_in, -2.0 * plan.beta))
    return gates


def _rus_attempt(plan: NeuronPlan) -> list[Gate]:
    out = _rus_chain(plan, +1.0)
    out.append(cy(plan.rus_input, plan.ancilla))
    out.append(rz(plan.rus_input, math.pi / 2.0))
    out += _rus_chain(plan, -1.0)
    return out


def build_rus_neuron(plan: NeuronPlan, max_attempts: int = 10, cbit_base: int = 0) -> tuple[list[Gate], int]:
    """Repeat-until-success update as a dynamic fragment.

    Jump targets are relative to the fragment start; append with
    hopfield.append_fragment (or rebase manually). Each attempt measures the
    input qubit into its own cbit, so the per-shot failure count is the sum
    of those bits. Returns (gates, cbits_used).
    """
    if plan.rus_input is None:
        raise ValueError("RUS plan needs a rus_input qubit")
    if max_attempts < 1:
        raise ValueError("max_attempts must be >= 1")
    gates: list[Gate] = []
    patch_success: list[int] = []  # jz positions waiting for the swap pc
    for k in range(max_attempts):
        gates += _rus_attempt(plan)
        gates.append(measure(plan.rus_input, cbit_base + k))
        patch_success.append(len(gates))
        gates.append(Gate("jz", (), cbit=cbit_base + k, target_pc=-1))
        gates.append(ry(plan.ancilla, -math.pi / 2.0))
        gates.append(reset(plan.rus_input))
    gates.append(Gate("mark_fail", ()))
    end_jump = len(gates)
    gates.append(Gate("jmp", (), target_pc=-1))
    swap_pc = len(gates)
    gates.append(swap(plan.ancilla, plan.target))
    end_pc = len(gates)

    fixed = list(gates)
    for pos in patch_success:
        fixed[pos] = Gate("jz", (), cbit=fixed[pos].cbit, target_pc=swap_pc)
    fixed[end_jump] = Gate("jmp", (), target_pc=end_pc)
    return fixed, max_attempts


def build_rus_forced(plan: NeuronPlan, failures: int, cbit_base: int = 0) -> list[Gate]:
    """Deterministic RUS trajectory with exactly `failures` failed attempts.

    Used for gate-complexity accounting: no control flow, measures and resets
    pass through the transpiler uncounted.
    """
    if failures < 0:
        raise ValueError("failures must be >= 0")
    gates: list[Gate] = []
    for k in range(failures):
        gates += _rus_attempt(plan)
        gates.append(measure(plan.rus_input, cbit_base + k))
        gates.append(ry(plan.ancilla, -math.pi / 2.0))
        gates.append(reset(plan.rus_input))
    gates += _rus_attempt(plan)
    gates.append(measure(plan.rus_input, cbit_base + failures))
    gates.append(swap(plan.ancilla, plan.target))
    return gates
