"""Stochastic device-noise model: depolarizing gate errors, thermal relaxation
and classical readout flips, parameterized per IBMQ device.

Noise is unraveled per trajectory: each channel is an independent event that
fires with a fixed probability and applies a discrete action (Pauli, damping
reset, or a recorded-bit flip). When a circuit still contains composite gates
(cry, ry, cy, swap), channels attach at the rates of the gate's basis-level
decomposition, so an untranspiled run carries the same noise budget as a
transpiled one.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field, replace

import numpy as np

from qham.circuit import (
    CH_DAMP_A,
    CH_DAMP_B,
    CH_DEPH_A,
    CH_DEPH_B,
    CH_DEPOL1_A,
    CH_DEPOL1_B,
    CH_DEPOL2,
    CH_READOUT,
    Circuit,
    Gate,
    UNITARY_KINDS,
)


class DeviceNotFound(KeyError):
    pass


@dataclass(frozen=True)
class DeviceNoiseParams:
    name: str
    t1_us: float
    t2_us: float
    readout_err: float
    sx_err: float
    cnot_err: float | None = None

    def __post_init__(self):
        if self.t1_us <= 0 or self.t2_us <= 0:
            raise ValueError(f"{self.name}: T1 and T2 must be positive")
        if self.t2_us > 2.0 * self.t1_us + 1e-12:
            raise ValueError(f"{self.name}: T2 must not exceed 2*T1")
        for label, p in (("readout", self.readout_err), ("sx", self.sx_err), ("cnot", self.cnot_err)):
            if p is not None and not 0.0 <= p <= 1.0:
                raise ValueError(f"{self.name}: {label} error rate {p} outside [0, 1]")


@dataclass(frozen=True)
class GateDurations:
    single_qubit_ns: float = 71.0
    cnot_ns: float = 300.0
    readout_ns: float = 1000.0

    def __post_init__(self):
        if min(self.single_qubit_ns, self.cnot_ns, self.readout_ns) <= 0:
            raise ValueError("gate durations must be positive")


@dataclass(frozen=True)
class NoiseSpec:
    device: DeviceNoiseParams
    durations: GateDurations = field(default_factory=GateDurations)
    depolarizing: bool = True
    thermal: bool = True
    readout: bool = True


# Measured device characteristics (error rates as probabilities, not percent).
_DEVICES = [
    DeviceNoiseParams("ibmq_16_melbourne", 55.60, 56.15, 0.0689, 0.00125, 0.0305),
    DeviceNoiseParams("ibmqx2", 59.30, 36.05, 0.0458, 0.00099, 0.0175),
    DeviceNoiseParams("ibmq_athens", 74.08, 91.22, 0.0202, 0.00045, 0.0121),
    DeviceNoiseParams("ibmq_santiago", 121.58, 101.01, 0.0436, 0.00024, 0.0074),
    DeviceNoiseParams("ibmq_lima", 79.79, 85.86, 0.0260, 0.00034, 0.0097),
    DeviceNoiseParams("ibmq_quito", 81.83, 80.41, 0.0292, 0.00054, 0.0121),
    DeviceNoiseParams("ibmq_belem", 75.62, 100.24, 0.0256, 0.00026, 0.0119),
    DeviceNoiseParams("ibmq_armonk", 138.19, 222.74, 0.0260, 0.00019, None),
]


def device_registry() -> list[DeviceNoiseParams]:
    return list(_DEVICES)


def get_device(name: str) -> DeviceNoiseParams:
    for dev in _DEVICES:
        if dev.name == name:
            return dev
    raise DeviceNotFound(f"unknown device {name!r}; known: {[d.name for d in _DEVICES]}")


def load_registry(path) -> list[DeviceNoiseParams]:
    """Read user-supplied devices from a JSON list with the registry field names."""
    with open(path) as f:
        rows = json.load(f)
    return [
        DeviceNoiseParams(
            name=r["name"],
            t1_us=float(r["t1_us"]),
            t2_us=float(r["t2_us"]),
            readout_err=float(r["readout_err"]),
            sx_err=float(r["sx_err"]),
            cnot_err=None if r.get("cnot_err") is None else float(r["cnot_err"]),
        )
        for r in rows
    ]


def for_device(name: str, **kwargs) -> NoiseSpec:
    return NoiseSpec(device=get_device(name), **kwargs)


def disable_channels(spec: NoiseSpec, *, depolarizing=None, thermal=None, readout=None) -> NoiseSpec:
    out = spec
    if depolarizing is not None:
        out = replace(out, depolarizing=depolarizing)
    if thermal is not None:
        out = replace(out, thermal=thermal)
    if readout is not None:
        out = replace(out, readout=readout)
    return out


@dataclass(frozen=True)
class ErrorChannel:
    kind: str  # depolarizing | amplitude_damping | dephasing | readout
    prob: float
    qubits: tuple[int, ...]


# Basis-gate pattern per logical gate: "s" = single on the rotation target,
# "c" = CNOT on (control, target). These are what set the noise budget of an
# untranspiled gate; they match the transpiler's decomposition lengths.
_EQUIV = {
    "x": "s",
    "sx": "s",
    "id": "s",
    "rz": "s",
    "ry": "ssss",
    "cnot": "c",
    "cry": "sssscssssc",
    "cy": "scs",
    "swap": "ccc",
}


def _thermal_probs(dev: DeviceNoiseParams, t_ns: float) -> tuple[float, float]:
    t_us = t_ns * 1e-3
    p_amp = 1.0 - math.exp(-t_us / dev.t1_us)
    inv_tphi = 1.0 / dev.t2_us - 1.0 / (2.0 * dev.t1_us)
    p_phase = 0.0 if inv_tphi <= 0 else 1.0 - math.exp(-t_us * inv_tphi)
    return min(max(p_amp, 0.0), 1.0), min(max(p_phase, 0.0), 1.0)


def channels_for_gate(gate: Gate, spec: NoiseSpec) -> list[ErrorChannel]:
    """Stochastic error events for one unitary gate, in basis-gate order."""
    if gate.kind not in UNITARY_KINDS:
        raise ValueError(f"channels are defined for unitary gates only, got {gate.kind}")
    pattern = _EQUIV[gate.kind]
    dev = spec.device
    if "c" in pattern and dev.cnot_err is None:
        raise ValueError(f"device {dev.name} has no two-qubit error rate")
    target = gate.qubits[-1]
    out: list[ErrorChannel] = []
    for step in pattern:
        if step == "s":
            if spec.depolarizing:
                out.append(ErrorChannel("depolarizing", dev.sx_err, (target,)))
            if spec.thermal:
                p_amp, p_phase = _thermal_probs(dev, spec.durations.single_qubit_ns)
                out.append(ErrorChannel("amplitude_damping", p_amp, (target,)))
                out.append(ErrorChannel("dephasing", p_phase, (target,)))
        else:
            pair = gate.qubits
            if spec.depolarizing:
                out.append(ErrorChannel("depolarizing", dev.cnot_err, pair))
            if spec.thermal:
                p_amp, p_phase = _thermal_probs(dev, spec.durations.cnot_ns)
                for q in pair:
                    out.append(ErrorChannel("amplitude_damping", p_amp, (q,)))
                    out.append(ErrorChannel("dephasing", p_phase, (q,)))
    return out


def apply_readout_error(bit: int, p: float, rng) -> int:
    """Flip a recorded bit with probability p."""
    if not 0.0 <= p <= 1.0:
        raise ValueError(f"readout probability {p} outside [0, 1]")
    return int(bit) ^ int(rng.random() < p)


def compile_channels(circuit: Circuit, spec: NoiseSpec | None):
    """Flatten per-op channel tables for the kernel VMs.

    Zero-probability channels are dropped, so an all-zero NoiseSpec compiles
    to empty tables and runs through the noiseless path unchanged.
    """
    n = len(circuit.gates)
    ch_ptr = np.zeros(n + 1, dtype=np.int64)
    kinds: list[int] = []
    probs: list[float] = []
    if spec is not None:
        for i, g in enumerate(circuit.gates):
            if g.kind == "measure":
                if spec.readout and spec.device.readout_err > 0:
                    kinds.append(CH_READOUT)
                    probs.append(spec.device.readout_err)
            elif g.kind in UNITARY_KINDS:
                for ch in channels_for_gate(g, spec):
                    if ch.prob <= 0.0:
                        continue
                    if ch.kind == "depolarizing" and len(ch.qubits) == 2:
                        kinds.append(CH_DEPOL2)
                    else:
                        slot_a = ch.qubits[0] == g.qubits[0]
                        if ch.kind == "depolarizing":
                            kinds.append(CH_DEPOL1_A if slot_a else CH_DEPOL1_B)
                        elif ch.kind == "amplitude_damping":
                            kinds.append(CH_DAMP_A if slot_a else CH_DAMP_B)
                        else:
                            kinds.append(CH_DEPH_A if slot_a else CH_DEPH_B)
                    probs.append(ch.prob)
            ch_ptr[i + 1] = len(kinds)
    return ch_ptr, np.array(kinds, dtype=np.int64), np.array(probs, dtype=np.float64)
