"""Basis decompositions, count formulas, and coupling-map routing."""

import math

import numpy as np
import pytest

import qham
from qham import neuron, simulator, transpile
from qham.circuit import Circuit, CircuitError
from qham.transpile import CouplingMap, GateCounts, RoutingError


def _dense(gates, nq):
    return simulator.dense_unitary(Circuit(nq, 0, list(gates)))


def test_cy_decomposition_sequence():
    dec = transpile.decompose_gate(qham.cy(0, 1))
    assert [g.kind for g in dec] == ["rz", "cnot", "rz"]
    assert dec[0].qubits == (1,) and dec[0].angle == pytest.approx(-math.pi / 2)
    assert dec[2].qubits == (1,) and dec[2].angle == pytest.approx(math.pi / 2)
    assert dec[1].qubits == (0, 1)


def test_swap_decomposition():
    dec = transpile.decompose_gate(qham.swap(0, 1))
    assert [g.kind for g in dec] == ["cnot", "cnot", "cnot"]
    assert dec[0].qubits == (0, 1) and dec[1].qubits == (1, 0) and dec[2].qubits == (0, 1)


def test_cry_decomposition_structure():
    dec = transpile.decompose_gate(qham.cry(0, 1, 0.913))
    assert len(dec) == 10
    counts = transpile.count_basis_gates(dec)
    assert (counts.total, counts.single_qubit, counts.cnot) == (10, 8, 2)


def test_generic_lengths_hold_at_special_angles():
    # no angle-specific shortcuts: pi behaves like any other angle
    assert len(transpile.decompose_gate(qham.cry(0, 1, math.pi))) == 10
    assert len(transpile.decompose_gate(qham.ry(0, 0.0))) == 4


def test_decompose_rejects_nonunitary():
    with pytest.raises(CircuitError):
        transpile.decompose_gate(qham.measure(0, 0))


def test_decomposition_faithfulness_random_angles(rng):
    for _ in range(100):
        angle = float(rng.uniform(-2 * math.pi, 2 * math.pi))
        for gate, nq in [
            (qham.ry(0, angle), 1),
            (qham.rz(0, angle), 1),
            (qham.cry(0, 1, angle), 2),
            (qham.cry(1, 0, angle), 2),
            (qham.cy(0, 1), 2),
            (qham.swap(0, 1), 2),
            (qham.x(0), 1),
            (qham.sx(0), 1),
        ]:
            ref = _dense([gate], nq)
            got = _dense(transpile.decompose_gate(gate), nq)
            assert simulator.phase_distance(got, ref) < 1e-10


def test_transpile_empty_and_single():
    _, counts = transpile.transpile_circuit(Circuit(2, 0))
    assert (counts.total, counts.single_qubit, counts.cnot) == (0, 0, 0)
    _, counts = transpile.transpile_circuit(Circuit(1, 0, [qham.rz(0, 0.4)]))
    assert (counts.total, counts.single_qubit, counts.cnot) == (1, 1, 0)


def test_transpile_preserves_unitary(rng):
    circ = Circuit(3, 0)
    for _ in range(12):
        k = rng.choice(["ry", "cry", "cy", "swap", "rz", "x", "sx"])
        qs = rng.permutation(3)[:2]
        if k in ("ry", "rz"):
            circ.add(qham.Gate(k, (int(qs[0]),), angle=float(rng.uniform(-3, 3))))
        elif k in ("x", "sx"):
            circ.add(qham.Gate(k, (int(qs[0]),)))
        elif k == "cry":
            circ.add(qham.cry(int(qs[0]), int(qs[1]), float(rng.uniform(-3, 3))))
        else:
            circ.add(qham.Gate(k, (int(qs[0]), int(qs[1]))))
    basis, _ = transpile.transpile_circuit(circ)
    assert all(g.kind in transpile.BASIS_KINDS for g in basis.gates)
    assert simulator.phase_distance(simulator.dense_unitary(basis), simulator.dense_unitary(circ)) < 1e-10


def test_predicted_counts_simplified_values():
    assert transpile.predicted_counts_simplified(4, 1) == GateCounts(37, 28, 9)
    assert transpile.predicted_counts_simplified(2, 1) == GateCounts(17, 12, 5)
    assert transpile.predicted_counts_simplified(4, 3) == GateCounts(111, 84, 27)


def test_predicted_counts_rus_values():
    assert transpile.predicted_counts_rus(4, 1, 0) == GateCounts(75, 59, 16)
    assert transpile.predicted_counts_rus(4, 1, 1) == GateCounts(151, 122, 29)
    assert transpile.predicted_counts_rus(2, 1, 0) == GateCounts(35, 27, 8)


def test_measured_counts_match_formulas_small():
    from qham.cli import _measured_rus, _measured_simplified

    for n in (2, 3, 5):
        for u in (1, 2):
            assert _measured_simplified(n, u) == transpile.predicted_counts_simplified(n, u)
            for f in (0, 1):
                assert _measured_rus(n, u, f) == transpile.predicted_counts_rus(n, u, f)


def test_gate_counts_invariant():
    with pytest.raises(ValueError):
        GateCounts(10, 5, 4)


def test_coupling_map_validation():
    with pytest.raises(ValueError):
        CouplingMap(2, [(0, 0)])
    with pytest.raises(ValueError):
        CouplingMap(2, [(0, 5)])
    cm = CouplingMap(3, [(0, 1), (1, 2), (1, 0)])
    assert cm.edges == [(0, 1), (1, 2)]  # deduplicated, undirected


def test_coupling_map_json(tmp_path):
    path = tmp_path / "map.json"
    path.write_text('{"qubits": 3, "edges": [[0, 1], [1, 2]]}')
    cm = CouplingMap.from_json(path)
    assert cm.qubit_count == 3 and cm.connected(0, 1) and not cm.connected(0, 2)


def test_melbourne_map_shape():
    cm = transpile.melbourne_map()
    assert cm.qubit_count == 15
    assert cm.is_connected()
    degree = {q: 0 for q in range(15)}
    for a, b in cm.edges:
        degree[a] += 1
        degree[b] += 1
    assert max(degree.values()) <= 3


def test_route_line_inflates_cnot():
    line = CouplingMap(3, [(0, 1), (1, 2)])
    routed, perm = transpile.route(Circuit(3, 0, [qham.cnot(0, 2)]), line)
    counts = transpile.count_basis_gates(routed.gates)
    assert counts.cnot == 7  # one swap in, one swap out, each 3 CNOTs
    assert perm == [0, 1, 2]
    ref = simulator.dense_unitary(Circuit(3, 0, [qham.cnot(0, 2)]))
    got = simulator.dense_unitary(routed)
    assert simulator.phase_distance(got, ref) < 1e-10


def test_route_adjacent_unchanged():
    line = CouplingMap(3, [(0, 1), (1, 2)])
    circ = Circuit(3, 0, [qham.cnot(0, 1), qham.x(2)])
    routed, _ = transpile.route(circ, line)
    assert [g.kind for g in routed.gates] == ["cnot", "x"]


def test_route_fully_connected_identity(rng):
    cm = CouplingMap.fully_connected(4)
    circ = Circuit(4, 0)
    for _ in range(10):
        qs = rng.permutation(4)[:2]
        circ.add(qham.cnot(int(qs[0]), int(qs[1])))
    routed, _ = transpile.route(circ, cm)
    assert len(routed.gates) == 10


def test_route_faithfulness_random(rng):
    cm = CouplingMap(4, [(0, 1), (1, 2), (2, 3)])
    for _ in range(10):
        circ = Circuit(4, 0)
        for _ in range(6):
            qs = rng.permutation(4)[:2]
            kind = rng.choice(["cnot", "rz", "sx"])
            if kind == "cnot":
                circ.add(qham.cnot(int(qs[0]), int(qs[1])))
            elif kind == "rz":
                circ.add(qham.rz(int(qs[0]), float(rng.uniform(-3, 3))))
            else:
                circ.add(qham.sx(int(qs[0])))
        routed, _ = transpile.route(circ, cm)
        assert all(
            cm.connected(*g.qubits) for g in routed.gates if g.kind == "cnot"
        )
        ref = simulator.dense_unitary(circ)
        got = simulator.dense_unitary(routed)
        assert simulator.phase_distance(got, ref) < 1e-10


def test_route_disconnected_map():
    cm = CouplingMap(4, [(0, 1), (2, 3)])
    with pytest.raises(RoutingError):
        transpile.route(Circuit(4, 0, [qham.cnot(0, 3)]), cm)


def test_route_rejects_oversized_circuit():
    cm = CouplingMap(2, [(0, 1)])
    with pytest.raises(RoutingError):
        transpile.route(Circuit(3, 0), cm)
