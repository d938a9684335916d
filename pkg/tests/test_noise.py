"""Device registry values, channel construction, readout flips."""

import math

import numpy as np
import pytest

import qham
from qham import noise
from qham.circuit import Circuit


def test_registry_has_eight_devices():
    regs = noise.device_registry()
    assert len(regs) == 8
    assert all(0 <= d.readout_err <= 1 for d in regs)
    assert all(d.t2_us <= 2 * d.t1_us for d in regs)


def test_registry_known_values():
    mel = noise.get_device("ibmq_16_melbourne")
    assert (mel.t1_us, mel.t2_us) == (55.60, 56.15)
    assert (mel.readout_err, mel.sx_err, mel.cnot_err) == (0.0689, 0.00125, 0.0305)
    lima = noise.get_device("ibmq_lima")
    assert (lima.t1_us, lima.t2_us) == (79.79, 85.86)
    assert (lima.readout_err, lima.sx_err, lima.cnot_err) == (0.0260, 0.00034, 0.0097)


def test_registry_unknown_device():
    with pytest.raises(noise.DeviceNotFound):
        noise.get_device("nonexistent")


def test_registry_json_roundtrip(tmp_path):
    path = tmp_path / "devices.json"
    path.write_text(
        '[{"name": "toy", "t1_us": 10.0, "t2_us": 12.0, "readout_err": 0.01,'
        ' "sx_err": 0.001, "cnot_err": 0.02},'
        ' {"name": "toy1q", "t1_us": 99.0, "t2_us": 99.0, "readout_err": 0.0,'
        ' "sx_err": 0.0, "cnot_err": null}]'
    )
    devs = noise.load_registry(path)
    assert devs[0].name == "toy" and devs[0].cnot_err == 0.02
    assert devs[1].cnot_err is None


def test_device_params_validation():
    with pytest.raises(ValueError):
        noise.DeviceNoiseParams("bad", 10.0, 25.0, 0.0, 0.0, 0.0)  # T2 > 2*T1
    with pytest.raises(ValueError):
        noise.DeviceNoiseParams("bad", 10.0, 10.0, 1.5, 0.0, 0.0)


def test_thermal_probability_value():
    # 71 ns on T1 = 55.60 us
    spec = noise.for_device("ibmq_16_melbourne")
    chans = noise.channels_for_gate(qham.ry(0, 1.0), spec)
    amps = [c for c in chans if c.kind == "amplitude_damping"]
    assert len(amps) == 4  # one per equivalent basis single
    expected = 1.0 - math.exp(-71e-3 / 55.60)
    assert amps[0].prob == pytest.approx(expected, rel=1e-12)
    assert amps[0].prob == pytest.approx(1.277e-3, rel=1e-3)


def test_channels_disabled_is_empty():
    spec = noise.NoiseSpec(
        device=noise.get_device("ibmq_lima"), depolarizing=False, thermal=False, readout=False
    )
    assert noise.channels_for_gate(qham.cry(0, 1, 0.5), spec) == []


def test_channels_equivalent_counts():
    spec = noise.NoiseSpec(device=noise.get_device("ibmq_lima"), thermal=False)
    depol = noise.channels_for_gate(qham.cry(0, 1, 0.5), spec)
    ones = [c for c in depol if len(c.qubits) == 1]
    twos = [c for c in depol if len(c.qubits) == 2]
    assert len(ones) == 8 and len(twos) == 2
    assert all(c.prob == 0.00034 for c in ones)
    assert all(c.prob == 0.0097 for c in twos)
    assert all(c.qubits == (1,) for c in ones)  # singles act on the rotation target


def test_two_qubit_gate_on_single_qubit_device():
    spec = noise.for_device("ibmq_armonk")
    with pytest.raises(ValueError, match="two-qubit"):
        noise.channels_for_gate(qham.cnot(0, 1), spec)


def test_channels_reject_nonunitary():
    spec = noise.for_device("ibmq_lima")
    with pytest.raises(ValueError):
        noise.channels_for_gate(qham.measure(0, 0), spec)


def test_apply_readout_error_edges(rng):
    assert noise.apply_readout_error(1, 0.0, rng) == 1
    assert noise.apply_readout_error(0, 1.0, rng) == 1
    assert noise.apply_readout_error(1, 1.0, rng) == 0


def test_apply_readout_error_rate(rng):
    p = 0.0689
    trials = 100_000
    flips = sum(noise.apply_readout_error(1, p, rng) == 0 for _ in range(trials))
    sigma = math.sqrt(p * (1 - p) / trials)
    assert abs(flips / trials - p) < 3 * sigma


def test_zero_noise_identity():
    dev = noise.DeviceNoiseParams("zero", math.inf, math.inf, 0.0, 0.0, 0.0)
    spec = noise.NoiseSpec(device=dev)
    circ = Circuit(2, 2)
    circ.add(qham.ry(0, 0.8)).add(qham.cry(0, 1, 1.3)).add(qham.reset(0))
    circ.add(qham.measure(0, 0)).add(qham.measure(1, 1))
    assert qham.sample_counts(circ, 500, seed=4) == qham.sample_counts(circ, 500, seed=4, noise=spec)


def test_sampled_event_probabilities_clamped():
    # absurd durations drive the exponent hard; probabilities must stay in [0, 1]
    spec = noise.NoiseSpec(
        device=noise.get_device("ibmq_16_melbourne"),
        durations=noise.GateDurations(single_qubit_ns=1e9, cnot_ns=1e12),
    )
    for gate in (qham.ry(0, 0.3), qham.cry(0, 1, 0.3), qham.swap(0, 1)):
        for ch in noise.channels_for_gate(gate, spec):
            assert 0.0 <= ch.prob <= 1.0


def test_noisy_accuracy_ordering_quick():
    """Noisier devices degrade recall more (light version of the full check)."""
    from qham import hopfield
    from qham.hopfield import AncillaMode, UpdateSchedule

    pats = [[-1, 1, 1, -1], [1, -1, -1, 1]]
    w = qham.hebbian(pats)
    sched = UpdateSchedule([2], AncillaMode.RESET)
    accs = {}
    for label, spec in [
        ("mel", noise.for_device("ibmq_16_melbourne")),
        ("lima", noise.for_device("ibmq_lima")),
        ("none", None),
    ]:
        res = hopfield.run_recall([-1, 1, 0, -1], w, sched, shots=4000, seed=31, noise=spec)
        accs[label] = qham.density_accuracy(res.per_qubit_p1, pats[0])
    assert accs["mel"] < accs["lima"] < accs["none"]
