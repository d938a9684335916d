"""Quantum Hopfield associative memory toolkit.

Statevector simulation with device-noise trajectories, two quantum neuron
designs, Hebbian recall, basis-gate transpilation with exact complexity
accounting, and a Monte Carlo effective-memory-capacity benchmark.
"""

from qham.backend import backend_name, set_threads
from qham.capacity import (
    CapacityConfig,
    CapacityReport,
    classical_capacity,
    gen_patterns,
    gen_probe,
    max_flips,
    rho_eff,
    run_capacity,
    tune_u,
)
from qham.circuit import Circuit, CircuitError, Gate, cnot, cry, cy, idg, measure, reset, ry, rz, swap, sx, x
from qham.hopfield import (
    AncillaMode,
    RecallResult,
    UpdateSchedule,
    WeightMatrix,
    classical_update,
    density_accuracy,
    encode,
    energy,
    hebbian,
    majority_vote,
    pattern_bits,
    qubit_overhead,
    run_recall,
)
from qham.neuron import (
    ActivationKind,
    DegenerateWeights,
    NeuronPlan,
    activation,
    beta,
    build_rus_forced,
    build_rus_neuron,
    build_simplified_neuron,
    gamma,
    phi,
)
from qham.noise import (
    DeviceNoiseParams,
    GateDurations,
    NoiseSpec,
    apply_readout_error,
    channels_for_gate,
    device_registry,
    for_device,
    get_device,
    load_registry,
)
from qham.simulator import (
    ShotOutcome,
    SizeError,
    StateVector,
    apply_gate,
    dense_unitary,
    init_state,
    phase_distance,
    prob_one,
    run_shot,
    sample_counts,
)
from qham.transpile import (
    CouplingMap,
    GateCounts,
    RoutingError,
    decompose_gate,
    melbourne_map,
    predicted_counts_rus,
    predicted_counts_simplified,
    route,
    transpile_circuit,
)

__version__ = "0.1.0"
