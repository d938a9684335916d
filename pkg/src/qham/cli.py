"""Command-line entry point.

Subcommands map onto the toolkit's experiment protocols:

* neuron-sweep: activation transfer function over phi in [0, pi/2]
* recall: one associative-memory recall from a JSON config
* capacity: Monte Carlo effective-capacity sweep over (n, m)
* tune-u: update-count tuning curve for one (n, m)
* complexity: predicted vs transpiled gate counts for both neuron designs

Outputs embed a run manifest (command, config echo, seed, version,
timestamp); the data payload itself is a pure function of the config and
seed, independent of thread count. Flags can be defaulted via QHAM_*
environment variables (QHAM_SEED, QHAM_SHOTS, QHAM_NOISE, QHAM_FORMAT,
QHAM_THREADS).
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import os
import sys
from datetime import datetime, timezone

import numpy as np

import qham
from qham import capacity as cap
from qham import hopfield, neuron, noise, simulator, transpile
from qham.circuit import Circuit
from qham.hopfield import AncillaMode, UpdateSchedule

SCHEMA_VERSION = 1


class ConfigError(ValueError):
    pass


def _env_default(name, fallback, cast=str):
    raw = os.environ.get(f"QHAM_{name}")
    if raw is None:
        return fallback
    try:
        return cast(raw)
    except ValueError as e:
        raise ConfigError(f"bad QHAM_{name}={raw!r}: {e}") from None


def _noise_spec(name: str | None):
    if name is None or name == "none":
        return None
    return noise.for_device(name)


def _manifest(args, command: str) -> dict:
    cfg = {k: v for k, v in vars(args).items() if k != "func"}
    return {
        "schema": SCHEMA_VERSION,
        "command": command,
        "config": cfg,
        "seed": args.seed,
        "version": qham.__version__,
        "timestamp": datetime.now(timezone.utc).isoformat(),
    }


def _write_output(args, manifest: dict, rows: list[dict], out_key: str = "data") -> None:
    """JSON carries manifest + data; CSV carries the data rows only."""
    if args.format == "csv":
        buf = io.StringIO()
        if rows:
            writer = csv.DictWriter(buf, fieldnames=list(rows[0].keys()))
            writer.writeheader()
            writer.writerows(rows)
        payload = buf.getvalue()
    else:
        payload = json.dumps({"manifest": manifest, out_key: rows}, indent=2, default=_jsonable)
        payload += "\n"
    if args.out == "-":
        sys.stdout.write(payload)
    else:
        try:
            with open(args.out, "w") as f:
                f.write(payload)
        except OSError as e:
            raise SystemExit(f"cannot write {args.out}: {e}")


def _jsonable(obj):
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, (np.floating,)):
        return float(obj)
    if isinstance(obj, np.ndarray):
        return obj.tolist()
    if isinstance(obj, AncillaMode):
        return obj.value
    raise TypeError(f"not JSON-serializable: {type(obj)}")


def _load_config(path) -> dict:
    try:
        with open(path) as f:
            cfg = json.load(f)
    except (OSError, json.JSONDecodeError) as e:
        raise ConfigError(f"{path}: {e}") from None
    if cfg.get("schema") != SCHEMA_VERSION:
        raise ConfigError(f"{path}: expected \"schema\": {SCHEMA_VERSION}")
    return cfg


def _require(cfg: dict, field: str, path: str):
    if field not in cfg:
        raise ConfigError(f"{path}: missing field {field!r}")
    return cfg[field]


def cmd_neuron_sweep(args) -> int:
    if args.points < 2:
        raise ConfigError("need at least 2 sweep points")
    kind = neuron.ActivationKind(args.kind)
    spec = _noise_spec(args.noise)
    grid = np.linspace(0.0, math.pi / 2.0, args.points)
    rows = []
    for i, ph in enumerate(grid):
        analytic = neuron.activation(kind, ph)
        if kind is neuron.ActivationKind.SIMPLIFIED:
            plan = neuron.NeuronPlan(target=1, ancilla=0, gamma=1.0, beta=float(ph))
            gates = neuron.build_simplified_neuron(plan)
            circ = Circuit(2, 1, list(gates)).add(qham.measure(1, 0))
            if spec is None:
                state = simulator.exact_state(Circuit(2, 0, list(gates)))
                sim_p1 = simulator.prob_one(state, 1)
                failures = 0.0
            else:
                bits, _ = simulator.run_shots_raw(circ, args.shots, args.seed + i, spec)
                sim_p1 = float(bits[:, 0].mean())
                failures = 0.0
        else:
            plan = neuron.NeuronPlan(target=2, ancilla=1, gamma=1.0, beta=float(ph), rus_input=0)
            if spec is None and not args.sampled:
                sim_p1 = _rus_exact_conditional(plan)
                failures = 0.0
            else:
                frag, ncb = neuron.build_rus_neuron(plan, max_attempts=args.max_attempts)
                circ = Circuit(3, ncb + 1)
                hopfield.append_fragment(circ, frag)
                circ.add(qham.measure(2, ncb))
                bits, fails = simulator.run_shots_raw(circ, args.shots, args.seed + i, spec)
                ok = fails == 0
                sim_p1 = float(bits[ok, ncb].mean()) if ok.any() else float("nan")
                failures = float((~ok).mean())
        rows.append(
            {
                "phi": float(ph),
                "analytic": analytic,
                "simulated_p1": sim_p1,
                "failed_fraction": failures,
            }
        )
    _write_output(args, _manifest(args, "neuron-sweep"), rows)
    return 0


def _rus_exact_conditional(plan: neuron.NeuronPlan) -> float:
    """Success-conditioned output marginal of one attempt, by exact projection."""
    att = neuron._rus_attempt(plan)
    nq = max(plan.rus_input, plan.ancilla, plan.target, *[q for q, _ in plan.controls] or [0]) + 1
    state = simulator.exact_state(Circuit(nq, 0, list(att))).amplitudes
    idx = np.arange(state.size)
    success = (idx >> plan.rus_input) & 1 == 0
    mass = np.abs(state[success]) ** 2
    out_bit = (idx[success] >> plan.ancilla) & 1
    return float(mass[out_bit == 1].sum() / mass.sum())


def cmd_recall(args) -> int:
    cfg = _load_config(args.config)
    attractors = _require(cfg, "attractors", args.config)
    probe = _require(cfg, "probe", args.config)
    sched_cfg = _require(cfg, "schedule", args.config)
    try:
        schedule = UpdateSchedule(
            [int(t) for t in _require(sched_cfg, "targets", args.config + ":schedule")],
            AncillaMode(sched_cfg.get("ancilla_mode", "reset")),
        )
    except ValueError as e:
        raise ConfigError(f"{args.config}: schedule: {e}") from None
    shots = int(cfg.get("shots", args.shots))
    seed = int(cfg.get("seed", args.seed))
    spec = _noise_spec(cfg.get("noise", args.noise))
    w = hopfield.hebbian(attractors)
    res = hopfield.run_recall(probe, w, schedule, shots=shots, seed=seed, noise=spec)
    n = len(probe)
    side = math.isqrt(n)
    row = {
        "per_qubit_p1": [float(p) for p in res.per_qubit_p1],
        "majority_vote": "".join(str(b) for b in res.majority_vote),
        "counts": res.counts,
        "shots": shots,
        "exact_marginals": res.exact,
    }
    if side * side == n:
        grid = np.asarray(res.per_qubit_p1).reshape(side, side)
        row["grid"] = [[float(p) for p in r] for r in grid]
    _write_output(args, _manifest(args, "recall"), [row], out_key="result")
    return 0


def _capacity_config(cfg_row: dict, args, n: int, m: int, u: int, trials: int) -> cap.CapacityConfig:
    return cap.CapacityConfig(
        n=n,
        m=m,
        rho=float(cfg_row["rho"]),
        u=u,
        trials=trials,
        shots=int(cfg_row.get("shots", args.shots)),
        noise=_noise_spec(cfg_row.get("noise", args.noise)),
        seed=int(cfg_row.get("seed", args.seed)),
        ancilla_mode=AncillaMode(cfg_row.get("ancilla_mode", "reset")),
    )


def _report_row(rep: cap.CapacityReport) -> dict:
    return {
        "n": rep.n,
        "m": rep.m,
        "alpha": rep.alpha,
        "rho": rep.rho,
        "rho_eff": rep.rho_eff,
        "u": rep.u,
        "mv_accuracy": rep.mv_accuracy,
        "density_accuracy": rep.density_accuracy,
        "trials": rep.trials,
        "shots": rep.shots,
        "noise_device": rep.noise_device or "none",
    }


def cmd_capacity(args) -> int:
    cfg = _load_config(args.config)
    ns = [int(v) for v in _require(cfg, "n", args.config)]
    ms = [int(v) for v in _require(cfg, "m", args.config)]
    _require(cfg, "rho", args.config)
    trials = int(cfg.get("trials", 1000 if cfg.get("noise") in (None, "none") else 200))
    rows = []
    for n in ns:
        for m in ms:
            u_cfg = cfg.get("u", "tuned")
            if u_cfg == "tuned":
                u_range = cfg.get("u_range", list(range(0, n + 1)))
                tune_trials = int(cfg.get("tune_trials", trials))
                best_u, _ = cap.tune_u(_capacity_config(cfg, args, n, m, 0, tune_trials), u_range)
                u = best_u
            else:
                u = int(u_cfg)
            rep = cap.run_capacity(_capacity_config(cfg, args, n, m, u, trials))
            rows.append(_report_row(rep))
    _write_output(args, _manifest(args, "capacity"), rows)
    return 0


def cmd_tune_u(args) -> int:
    cfg = _load_config(args.config)
    n = int(_require(cfg, "n", args.config))
    m = int(_require(cfg, "m", args.config))
    u_range = [int(u) for u in _require(cfg, "u_range", args.config)]
    trials = int(cfg.get("trials", 1000 if cfg.get("noise") in (None, "none") else 200))
    best_u, curve = cap.tune_u(_capacity_config(cfg, args, n, m, 0, trials), u_range)
    rows = [_report_row(rep) for rep in curve]
    manifest = _manifest(args, "tune-u")
    manifest["best_u"] = best_u
    _write_output(args, manifest, rows)
    return 0


def cmd_complexity(args) -> int:
    n_values = _parse_range(args.n_range)
    u_values = _parse_range(args.u_range)
    f_values = _parse_range(args.f_range)
    if not (n_values and u_values and f_values):
        raise ConfigError("empty n/u/f range")
    rows = []
    mismatches = 0
    for n in n_values:
        for u in u_values:
            pred_s = transpile.predicted_counts_simplified(n, u)
            meas_s = _measured_simplified(n, u)
            row = {
                "n": n,
                "u": u,
                "f": "",
                "design": "simplified",
                "predicted_total": pred_s.total,
                "predicted_single": pred_s.single_qubit,
                "predicted_cnot": pred_s.cnot,
                "measured_total": meas_s.total,
                "measured_single": meas_s.single_qubit,
                "measured_cnot": meas_s.cnot,
                "qubits_fresh_ancilla": hopfield.qubit_overhead(n, u, AncillaMode.FRESH),
                "qubits_reset_reuse": hopfield.qubit_overhead(n, u, AncillaMode.RESET),
                "match": pred_s == meas_s,
            }
            mismatches += not row["match"]
            rows.append(row)
            for f in f_values:
                pred_r = transpile.predicted_counts_rus(n, u, f)
                meas_r = _measured_rus(n, u, f)
                row = {
                    "n": n,
                    "u": u,
                    "f": f,
                    "design": "rus",
                    "predicted_total": pred_r.total,
                    "predicted_single": pred_r.single_qubit,
                    "predicted_cnot": pred_r.cnot,
                    "measured_total": meas_r.total,
                    "measured_single": meas_r.single_qubit,
                    "measured_cnot": meas_r.cnot,
                    "qubits_fresh_ancilla": n + 2 * u,
                    "qubits_reset_reuse": n + 2,
                    "match": pred_r == meas_r,
                }
                mismatches += not row["match"]
                rows.append(row)
    manifest = _manifest(args, "complexity")
    manifest["mismatches"] = mismatches
    _write_output(args, manifest, rows)
    if mismatches:
        print(f"complexity check FAILED: {mismatches} mismatching rows", file=sys.stderr)
        return 1
    return 0


def _counting_weights(n: int) -> hopfield.WeightMatrix:
    w = np.ones((n, n)) - np.eye(n)
    return hopfield.WeightMatrix(n, w)


def _measured_simplified(n: int, u: int) -> transpile.GateCounts:
    w = _counting_weights(n)
    sched = UpdateSchedule([k % n for k in range(u)], AncillaMode.RESET)
    circ = hopfield.build_recall_circuit(
        np.ones(n), w, sched, include_encode=False, include_measure=False
    )
    _, counts = transpile.transpile_circuit(circ)
    return counts


def _measured_rus(n: int, u: int, f: int) -> transpile.GateCounts:
    w = _counting_weights(n)
    gam = neuron.gamma(1.0, n)
    circ = Circuit(n + 2, (f + 1) * u)
    cb = 0
    for k in range(u):
        tgt = k % n
        plan = neuron.NeuronPlan(
            target=tgt,
            ancilla=n,
            gamma=gam,
            beta=neuron.beta(w.w[tgt], gam),
            controls=[(j, float(w.w[tgt, j])) for j in range(n) if j != tgt],
            rus_input=n + 1,
        )
        circ.extend(neuron.build_rus_forced(plan, f, cbit_base=cb))
        cb += f + 1
    _, counts = transpile.transpile_circuit(circ)
    return counts


def _parse_range(text: str) -> list[int]:
    """Range syntax: '2..8' (inclusive) or '2,3,5'."""
    text = text.strip()
    if not text:
        return []
    if ".." in text:
        lo, hi = text.split("..", 1)
        return list(range(int(lo), int(hi) + 1))
    return [int(v) for v in text.split(",")]


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="qham", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=qham.__version__)
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p):
        p.add_argument("--seed", type=int, default=_env_default("SEED", 0, int))
        p.add_argument("--shots", type=int, default=_env_default("SHOTS", 8192, int))
        p.add_argument("--noise", default=_env_default("NOISE", None), help="device name or 'none'")
        p.add_argument("--format", choices=("json", "csv"), default=_env_default("FORMAT", "json"))
        p.add_argument("--out", default="-", help="output path ('-' for stdout)")
        p.add_argument("--threads", type=int, default=_env_default("THREADS", 0, int), help="0 = library default")

    p = sub.add_parser("neuron-sweep", help="activation function sweep over phi")
    common(p)
    p.add_argument("--kind", choices=("simplified", "rus"), default="simplified")
    p.add_argument("--points", type=int, default=33)
    p.add_argument("--max-attempts", type=int, default=10)
    p.add_argument("--sampled", action="store_true", help="sample even when noiseless")
    p.set_defaults(func=cmd_neuron_sweep)

    p = sub.add_parser("recall", help="run one recall from a JSON config")
    common(p)
    p.add_argument("config")
    p.set_defaults(func=cmd_recall)

    p = sub.add_parser("capacity", help="capacity sweep from a JSON config")
    common(p)
    p.add_argument("config")
    p.set_defaults(func=cmd_capacity)

    p = sub.add_parser("tune-u", help="update-count tuning curve from a JSON config")
    common(p)
    p.add_argument("config")
    p.set_defaults(func=cmd_tune_u)

    p = sub.add_parser("complexity", help="predicted vs measured basis-gate counts")
    common(p)
    p.add_argument("--n-range", default="2..8")
    p.add_argument("--u-range", default="1..4")
    p.add_argument("--f-range", default="0..2")
    p.set_defaults(func=cmd_complexity)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    if args.threads:
        qham.set_threads(args.threads)
    try:
        return args.func(args)
    except (ConfigError, noise.DeviceNotFound, ValueError) as e:
        print(f"error: {e}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
