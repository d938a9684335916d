"""Acceptance suite: one criterion per test, one pass/fail line each.

The capacity criteria are Monte Carlo heavy and dominate the suite's
runtime (tens of minutes on two cores); everything else finishes in
seconds. Run with `pytest tests/test_acceptance.py -v -s`.
"""

import json
import math
import time
from itertools import product

import numpy as np
import pytest

import qham
from qham import capacity, cli, hopfield, neuron, noise, simulator, transpile
from qham.circuit import Circuit
from qham.hopfield import AncillaMode, UpdateSchedule
from qham.neuron import ActivationKind

PI = math.pi
ATTRACTORS = [[-1, 1, 1, -1], [1, -1, -1, 1]]
CORRUPTED_PROBE = [-1, 1, 0, -1]


def _report(num: int, name: str, ok: bool, detail: str = ""):
    print(f"\n[criterion {num:02d}] {name}: {'PASS' if ok else 'FAIL'} {detail}")
    assert ok, f"criterion {num} ({name}): {detail}"


def test_criterion_01_activation_exactness():
    t0 = time.perf_counter()
    grid = np.linspace(0.0, PI / 2, 33)
    worst_simple = 0.0
    for ph in grid:
        plan = neuron.NeuronPlan(target=1, ancilla=0, gamma=1.0, beta=float(ph))
        circ = Circuit(2, 0, list(neuron.build_simplified_neuron(plan)))
        p1 = simulator.prob_one(simulator.exact_state(circ), 1)
        worst_simple = max(worst_simple, abs(p1 - math.sin(ph) ** 2))

    worst_rus = 0.0
    for ph in grid:
        plan = neuron.NeuronPlan(target=2, ancilla=1, gamma=1.0, beta=float(ph), rus_input=0)
        att = neuron._rus_attempt(plan)
        amps = simulator.exact_state(Circuit(3, 0, list(att))).amplitudes
        idx = np.arange(amps.size)
        mass = np.abs(amps) ** 2
        succ = (idx & 1) == 0
        p_succ = mass[succ].sum()
        p1 = mass[succ & (((idx >> 1) & 1) == 1)].sum() / p_succ
        worst_rus = max(worst_rus, abs(p1 - neuron.activation(ActivationKind.RUS, float(ph))))

    shots = 100_000
    worst_sampled_sigmas = 0.0
    for ph in np.linspace(0.15, PI / 2 - 0.15, 7):
        plan = neuron.NeuronPlan(target=2, ancilla=1, gamma=1.0, beta=float(ph), rus_input=0)
        frag, ncb = neuron.build_rus_neuron(plan, max_attempts=10)
        circ = Circuit(3, ncb + 1)
        hopfield.append_fragment(circ, frag)
        circ.add(qham.measure(2, ncb))
        bits, fails = simulator.run_shots_raw(circ, shots, seed=1000 + int(ph * 100))
        ok = fails == 0
        p_hat = bits[ok, ncb].mean()
        expect = neuron.activation(ActivationKind.RUS, float(ph))
        sigma = math.sqrt(expect * (1 - expect) / int(ok.sum()))
        worst_sampled_sigmas = max(worst_sampled_sigmas, abs(p_hat - expect) / sigma)

    dt = time.perf_counter() - t0
    ok = worst_simple < 1e-9 and worst_rus < 1e-9 and worst_sampled_sigmas < 3.0 and dt < 10.0
    _report(
        1,
        "activation exactness",
        ok,
        f"simple err {worst_simple:.2e}, rus err {worst_rus:.2e}, "
        f"sampled {worst_sampled_sigmas:.2f} sigma, {dt:.1f}s",
    )


def test_criterion_02_closed_form_counts():
    from qham.cli import _measured_rus, _measured_simplified

    t0 = time.perf_counter()
    bad = []
    for n in range(2, 9):
        for u in range(1, 5):
            if _measured_simplified(n, u) != transpile.predicted_counts_simplified(n, u):
                bad.append(("simplified", n, u))
            for f in (0, 1, 2):
                if _measured_rus(n, u, f) != transpile.predicted_counts_rus(n, u, f):
                    bad.append(("rus", n, u, f))
    dt = time.perf_counter() - t0
    _report(2, "closed-form gate counts", not bad and dt < 5.0, f"mismatches {bad}, {dt:.1f}s")


def test_criterion_03_decomposition_faithfulness(rng):
    worst = 0.0
    for _ in range(100):
        angle = float(rng.uniform(-2 * PI, 2 * PI))
        for gate, nq in [
            (qham.ry(0, angle), 1),
            (qham.rz(0, angle), 1),
            (qham.cry(0, 1, angle), 2),
            (qham.cry(1, 0, -angle), 2),
            (qham.cy(0, 1), 2),
            (qham.swap(0, 1), 2),
        ]:
            ref = simulator.dense_unitary(Circuit(nq, 0, [gate]))
            got = simulator.dense_unitary(Circuit(nq, 0, transpile.decompose_gate(gate)))
            worst = max(worst, simulator.phase_distance(got, ref))
    _report(3, "decomposition faithfulness", worst < 1e-10, f"worst {worst:.2e}")


def test_criterion_04_oracle_equivalence(rng):
    from tests.test_simulator import _random_circuit

    worst = 0.0
    for _ in range(200):
        nq = int(rng.integers(1, 4))
        circ = _random_circuit(rng, nq, int(rng.integers(1, 21)))
        ref = simulator.dense_unitary(circ)[:, 0]
        got = simulator.exact_state(circ).amplitudes
        worst = max(worst, float(np.max(np.abs(got - ref))))
    _report(4, "statevector vs dense oracle", worst < 1e-12, f"worst {worst:.2e}")


def test_criterion_05_capacity_formula():
    vals = {
        (4, 0.0): 1.44,
        (5, 0.0): 1.55,
        (10, 0.1): 1.39,
    }
    errs = {k: abs(capacity.classical_capacity(*k) - v) for k, v in vals.items()}
    ok = all(e <= 0.01 for e in errs.values())
    _report(5, "classical capacity reference", ok, f"errors {dict(errs)}")


def test_criterion_06_two_attractor_recall():
    w = qham.hebbian(ATTRACTORS)
    res = qham.run_recall(CORRUPTED_PROBE, w, UpdateSchedule([2]), shots=8192, seed=7)
    expected = np.array([0.0, 1.0, math.sin(7 * PI / 16) ** 2, 0.0])
    marg_err = float(np.max(np.abs(res.per_qubit_p1 - expected)))
    dens = qham.density_accuracy(res.per_qubit_p1, ATTRACTORS[0])
    ok = (
        res.exact
        and marg_err < 1e-9
        and res.majority_vote == [0, 1, 1, 0]
        and abs(dens - 0.99049) <= 1e-5 + 5e-6  # analytic 0.9904849...
    )
    _report(
        6,
        "two-attractor recall marginals",
        ok,
        f"marginal err {marg_err:.2e}, vote {''.join(map(str, res.majority_vote))}, density {dens:.6f}",
    )


def test_criterion_07_capacity_perfect_recall():
    t0 = time.perf_counter()
    shots = 1024
    mv = {}
    dens = {}
    tuned = {}
    for n in range(4, 11):
        cfg = capacity.CapacityConfig(n=n, m=1, rho=0.2, u=0, trials=200, shots=shots, seed=100 + n)
        best_u, _ = capacity.tune_u(cfg, range(0, 2 * n + 1))
        tuned[n] = best_u
        rep = capacity.run_capacity(
            capacity.CapacityConfig(n=n, m=1, rho=0.2, u=best_u, trials=250, shots=shots, seed=500 + n)
        )
        mv[n] = rep.mv_accuracy
        dens[n] = rep.density_accuracy
    dt = time.perf_counter() - t0
    ok = (
        mv[4] == 1.0
        and mv[5] == 1.0
        and all(dens[n] > 0.90 for n in range(4, 11))
        and dt < 300.0
    )
    _report(
        7,
        "single-pattern capacity recall",
        ok,
        f"mv(4)={mv[4]}, mv(5)={mv[5]}, min density {min(dens.values()):.3f}, tuned u {tuned}, {dt:.0f}s",
    )


def test_criterion_08_noise_ordering():
    w = qham.hebbian(ATTRACTORS)
    sched = UpdateSchedule([2])
    shots = 10_000
    acc = {}
    devices = [d.name for d in noise.device_registry() if d.cnot_err is not None]
    for name in devices:
        res = qham.run_recall(CORRUPTED_PROBE, w, sched, shots=shots, seed=63, noise=noise.for_device(name))
        acc[name] = qham.density_accuracy(res.per_qubit_p1, ATTRACTORS[0])
    res0 = qham.run_recall(CORRUPTED_PROBE, w, sched, shots=shots, seed=63)
    acc_clean = qham.density_accuracy(res0.per_qubit_p1, ATTRACTORS[0])
    ok = (
        acc["ibmq_16_melbourne"] < acc["ibmq_lima"] < acc_clean
        and all(a < 1.0 for a in acc.values())
    )
    detail = ", ".join(f"{k.removeprefix('ibmq_')}={v:.3f}" for k, v in acc.items())
    _report(8, "noise degradation ordering", ok, f"{detail}, noiseless={acc_clean:.4f}")


def test_criterion_09_tuning_shape():
    t0 = time.perf_counter()
    u_range = list(range(1, 21))
    base = capacity.CapacityConfig(n=10, m=2, rho=0.2, u=1, trials=500, shots=1024, seed=314159)
    best_clean, curve_clean = capacity.tune_u(base, u_range)
    mel = noise.for_device("ibmq_16_melbourne")
    base_noisy = capacity.CapacityConfig(
        n=10, m=2, rho=0.2, u=1, trials=500, shots=1024, seed=314159, noise=mel
    )
    best_noisy, curve_noisy = capacity.tune_u(base_noisy, u_range)
    accs = [r.mv_accuracy for r in curve_clean]
    peak = max(accs)
    rises = accs[0] < peak - 0.05
    falls = accs[-1] < peak - 1e-12
    interior = u_range[0] < best_clean < u_range[-1]
    ok = rises and falls and interior and best_noisy <= best_clean
    dt = time.perf_counter() - t0
    _report(
        9,
        "update-count tuning shape",
        ok,
        f"noiseless argmax {best_clean} (peak {peak:.3f}, edges {accs[0]:.3f}/{accs[-1]:.3f}), "
        f"noisy argmax {best_noisy}, {dt:.0f}s",
    )


def test_criterion_10_qubit_overhead():
    bad = []
    for n in range(1, 17):
        for u in range(0, 17):
            if qham.qubit_overhead(n, u, AncillaMode.RESET) != n + 1:
                bad.append((n, u, "reset"))
            if qham.qubit_overhead(n, u, AncillaMode.FRESH) != n + u:
                bad.append((n, u, "fresh"))
    five = qham.qubit_overhead(4, 1, AncillaMode.FRESH)
    _report(10, "qubit overhead formulas", not bad and five == 5, f"bad {bad}, n=4 u=1 -> {five}")


def test_criterion_11_thread_determinism(tmp_path):
    cfg = tmp_path / "cap.json"
    cfg.write_text(
        json.dumps(
            {"schema": 1, "n": [6], "m": [2], "rho": 0.2, "u": 5, "trials": 30, "shots": 1024, "seed": 77}
        )
    )
    payloads = []
    for threads in (1, 2, 2):
        out = tmp_path / f"t{threads}_{len(payloads)}.csv"
        rc = cli.main(["capacity", str(cfg), "--format", "csv", "--threads", str(threads), "--out", str(out)])
        assert rc == 0
        payloads.append(out.read_bytes())
    sweep_out = []
    for threads in (1, 2):
        out = tmp_path / f"s{threads}.csv"
        rc = cli.main(
            ["neuron-sweep", "--kind", "rus", "--sampled", "--points", "5", "--shots", "2000",
             "--seed", "3", "--format", "csv", "--threads", str(threads), "--out", str(out)]
        )
        assert rc == 0
        sweep_out.append(out.read_bytes())
    ok = payloads[0] == payloads[1] == payloads[2] and sweep_out[0] == sweep_out[1]
    _report(11, "seeded thread-count determinism", ok, f"{len(payloads[0])}-byte payloads identical")
