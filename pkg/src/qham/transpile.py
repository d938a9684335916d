"""Lowering to the {CNOT, ID, Rz, SX, X} basis, gate accounting, and routing.

Decomposition lengths at a generic angle: CRy -> 10, Ry -> 4, CY -> 3,
Rz -> 1, SWAP -> 3 CNOTs. No angle-specific simplification is applied, so the
lengths hold for every angle and the closed-form circuit-size formulas can be
checked exactly. Non-unitary ops and control flow pass through uncounted.
"""

from __future__ import annotations

import json
import math
from collections import deque
from dataclasses import dataclass
from importlib import resources

from qham.circuit import Circuit, CircuitError, Gate, cnot, rz, sx

BASIS_KINDS = frozenset({"cnot", "id", "rz", "sx", "x"})
_SINGLE_BASIS = frozenset({"id", "rz", "sx", "x"})
_PASSTHROUGH = frozenset({"measure", "reset", "jz", "jmp", "mark_fail"})


class RoutingError(RuntimeError):
    pass


@dataclass(frozen=True)
class GateCounts:
    total: int
    single_qubit: int
    cnot: int

    def __post_init__(self):
        if self.total != self.single_qubit + self.cnot:
            raise ValueError("total must equal single_qubit + cnot")


def _ry_basis(q: int, angle: float) -> list[Gate]:
    # Ry(t) = Rz(pi) . SX . Rz(t+pi) . SX up to global phase (applied right to left).
    return [sx(q), rz(q, angle + math.pi), sx(q), rz(q, math.pi)]


def decompose_gate(gate: Gate) -> list[Gate]:
    """Basis-gate sequence equal to the gate's unitary up to global phase."""
    if gate.kind in BASIS_KINDS:
        return [gate]
    if gate.kind == "ry":
        return _ry_basis(gate.qubits[0], gate.angle)
    if gate.kind == "cry":
        c, t = gate.qubits
        half = gate.angle / 2.0
        return _ry_basis(t, half) + [cnot(c, t)] + _ry_basis(t, -half) + [cnot(c, t)]
    if gate.kind == "cy":
        c, t = gate.qubits
        return [rz(t, -math.pi / 2.0), cnot(c, t), rz(t, math.pi / 2.0)]
    if gate.kind == "swap":
        a, b = gate.qubits
        return [cnot(a, b), cnot(b, a), cnot(a, b)]
    raise CircuitError(f"no basis decomposition for {gate.kind}")


def count_basis_gates(gates) -> GateCounts:
    singles = sum(1 for g in gates if g.kind in _SINGLE_BASIS)
    cnots = sum(1 for g in gates if g.kind == "cnot")
    return GateCounts(singles + cnots, singles, cnots)


def transpile_circuit(circuit: Circuit) -> tuple[Circuit, GateCounts]:
    """Expand every gate to basis gates; measure/reset/jumps pass through uncounted."""
    expanded: list[list[Gate]] = []
    for g in circuit.gates:
        if g.kind in _PASSTHROUGH:
            expanded.append([g])
        else:
            expanded.append(decompose_gate(g))
    # Jump targets index ops, so they shift with the expansion.
    starts = []
    pos = 0
    for block in expanded:
        starts.append(pos)
        pos += len(block)
    starts.append(pos)
    out = Circuit(circuit.qubit_count, circuit.cbit_count)
    for block in expanded:
        for g in block:
            if g.kind in ("jz", "jmp"):
                g = Gate(g.kind, (), cbit=g.cbit, target_pc=starts[g.target_pc])
            out.add(g)
    counted = [g for g in out.gates if g.kind not in _PASSTHROUGH]
    return out, count_basis_gates(counted)


def predicted_counts_simplified(n: int, u: int) -> GateCounts:
    """Closed-form basis-gate counts for u updates of the plain neuron."""
    if n < 2 or u < 1:
        raise ValueError("need n >= 2 and u >= 1")
    return GateCounts((10 * n - 3) * u, (8 * n - 4) * u, (2 * n + 1) * u)


def predicted_counts_rus(n: int, u: int, f: int) -> GateCounts:
    """Closed-form counts for u RUS updates averaging f failures each."""
    if n < 2 or u < 1 or f < 0:
        raise ValueError("need n >= 2, u >= 1 and f >= 0")
    return GateCounts(
        (20 * n * (f + 1) - 4 * f - 5) * u,
        (16 * n * (f + 1) - f - 5) * u,
        (4 * n * (f + 1) - 3 * f) * u,
    )


@dataclass
class CouplingMap:
    qubit_count: int
    edges: list[tuple[int, int]]

    def __post_init__(self):
        seen = set()
        for a, b in self.edges:
            if a == b:
                raise ValueError("coupling map has a self-loop")
            if not (0 <= a < self.qubit_count and 0 <= b < self.qubit_count):
                raise ValueError(f"edge ({a}, {b}) references an invalid qubit")
            seen.add((min(a, b), max(a, b)))
        self.edges = sorted(seen)
        self._adj = {q: set() for q in range(self.qubit_count)}
        for a, b in self.edges:
            self._adj[a].add(b)
            self._adj[b].add(a)

    @classmethod
    def from_json(cls, path) -> "CouplingMap":
        with open(path) as f:
            data = json.load(f)
        return cls(int(data["qubits"]), [tuple(e) for e in data["edges"]])

    @classmethod
    def fully_connected(cls, qubit_count: int) -> "CouplingMap":
        edges = [(a, b) for a in range(qubit_count) for b in range(a + 1, qubit_count)]
        return cls(qubit_count, edges)

    def connected(self, a: int, b: int) -> bool:
        return b in self._adj[a]

    def shortest_path(self, a: int, b: int) -> list[int]:
        prev = {a: None}
        queue = deque([a])
        while queue:
            v = queue.popleft()
            if v == b:
                path = [v]
                while prev[v] is not None:
                    v = prev[v]
                    path.append(v)
                return path[::-1]
            for w in sorted(self._adj[v]):
                if w not in prev:
                    prev[w] = v
                    queue.append(w)
        raise RoutingError(f"no path between qubits {a} and {b}")

    def is_connected(self) -> bool:
        try:
            for q in range(1, self.qubit_count):
                self.shortest_path(0, q)
        except RoutingError:
            return False
        return True


def melbourne_map() -> CouplingMap:
    """15-qubit grid topology, transcribed from the published device diagram."""
    ref = resources.files("qham.data").joinpath("ibmq_16_melbourne_coupling.json")
    data = json.loads(ref.read_text())
    return CouplingMap(int(data["qubits"]), [tuple(e) for e in data["edges"]])


def route(circuit: Circuit, cmap: CouplingMap) -> tuple[Circuit, list[int]]:
    """Insert SWAP chains (as CNOT triples) so every CNOT acts on a map edge.

    Naive scheme: walk the control along a shortest path to the target's
    neighborhood, apply the CNOT, then walk it back, so the qubit layout is
    restored after every gate. The returned permutation is therefore the
    identity.
    """
    if circuit.qubit_count > cmap.qubit_count:
        raise RoutingError(f"circuit uses {circuit.qubit_count} qubits, map has {cmap.qubit_count}")
    if not cmap.is_connected():
        raise RoutingError("coupling map is not connected")
    out = Circuit(cmap.qubit_count, circuit.cbit_count)
    for g in circuit.gates:
        if g.kind in ("jz", "jmp"):
            raise RoutingError("cannot route circuits with control flow")
        if g.kind != "cnot" or cmap.connected(*g.qubits):
            out.add(g)
            continue
        path = cmap.shortest_path(g.qubits[0], g.qubits[1])
        hops = list(zip(path[:-2], path[1:-1]))
        for a, b in hops:
            out.extend(decompose_gate(Gate("swap", (a, b))))
        out.add(cnot(path[-2], path[-1]))
        for a, b in reversed(hops):
            out.extend(decompose_gate(Gate("swap", (a, b))))
    return out, list(range(cmap.qubit_count))
