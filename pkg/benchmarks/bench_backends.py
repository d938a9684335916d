#!/usr/bin/env python3
"""Compare the numba kernels against the pure-numpy fallback.

Runs the same seeded workloads on both backends (QHAM_BACKEND is read at
kernel-dispatch time, so each run is forced explicitly here) and reports
wall time plus a consistency check on the sampled histograms.

Usage: python benchmarks/bench_backends.py [--shots N] [--updates U]
"""

import argparse
import os
import time

import numpy as np


def run_workloads(shots: int, updates: int):
    from qham import hopfield, noise, simulator
    from qham.hopfield import AncillaMode, UpdateSchedule

    rng = np.random.default_rng(11)
    pats = rng.integers(0, 2, size=(2, 8)) * 2 - 1
    w = hopfield.hebbian(pats)
    probe = pats[0].astype(float)
    probe[4] *= -1
    sched = UpdateSchedule([int(t) for t in rng.integers(0, 8, updates)], AncillaMode.RESET)
    circ = hopfield.build_recall_circuit(probe, w, sched)
    mel = noise.for_device("ibmq_16_melbourne")

    results = {}
    timings = {}
    t0 = time.perf_counter()
    bits, _ = simulator.run_shots_raw(circ, shots, 7, force_vm=True)
    timings["noiseless VM"] = time.perf_counter() - t0
    results["noiseless VM"] = simulator.counts_from_bits(bits)

    t0 = time.perf_counter()
    bits, _ = simulator.run_shots_raw(circ, shots, 7)
    timings["noiseless tree"] = time.perf_counter() - t0
    results["noiseless tree"] = simulator.counts_from_bits(bits)

    t0 = time.perf_counter()
    bits, _ = simulator.run_shots_raw(circ, shots, 7, noise=mel)
    timings["melbourne VM"] = time.perf_counter() - t0
    results["melbourne VM"] = simulator.counts_from_bits(bits)
    return results, timings


def main():
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--shots", type=int, default=512)
    parser.add_argument("--updates", type=int, default=8)
    args = parser.parse_args()

    all_results = {}
    for backend in ("numba", "numpy"):
        os.environ["QHAM_BACKEND"] = backend
        # warm the JIT so compile time is not billed to the numba column
        run_workloads(8, 2)
        results, timings = run_workloads(args.shots, args.updates)
        all_results[backend] = results
        print(f"\nbackend = {backend}")
        for label, dt in timings.items():
            print(f"  {label:16s} {dt * 1000:8.1f} ms")

    print("\ncross-backend histogram agreement (same seeds):")
    for label in all_results["numba"]:
        same = all_results["numba"][label] == all_results["numpy"][label]
        print(f"  {label:16s} {'identical' if same else 'DIFFERENT'}")


if __name__ == "__main__":
    main()
