"""Monte Carlo effective-memory-capacity benchmark and update-count tuning.

Each trial draws m random patterns, trains Hebbian weights, corrupts a
randomly chosen pattern into a probe (exactly max_flips sign flips), runs a
recall with u randomly ordered updates, and scores the majority-vote string
and density accuracy against the source pattern. Trials are independent and
seeded individually, so results do not depend on execution order.

Update targets follow random sweeps: each block of n updates is an
independent uniform permutation of the qubits, truncated to u. Sweeps keep
the tuning curve's rise-and-fall intact; sampling targets with replacement
instead lets coverage of the corrupted qubit keep improving for u well past
2n, which flattens the curve's peak into a long plateau.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace

import numpy as np

from qham import hopfield
from qham.hopfield import AncillaMode, UpdateSchedule
from qham.noise import NoiseSpec


def classical_capacity(n: int, rho: float) -> float:
    """Classical recall-capacity reference: ((1-2*rho)^2 / 2) * n / ln(n)."""
    if n < 2:
        raise ValueError("classical capacity needs n >= 2")
    if not 0.0 <= rho < 0.5:
        raise ValueError("rho must lie in [0, 0.5)")
    return (1.0 - 2.0 * rho) ** 2 / 2.0 * n / math.log(n)


def max_flips(n: int, rho: float) -> int:
    """Largest flip count strictly below rho*n (never negative)."""
    if not 0.0 <= rho < 0.5:
        raise ValueError("rho must lie in [0, 0.5)")
    x = rho * n
    f = math.floor(x)
    if f >= x:
        f -= 1
    return max(f, 0)


def rho_eff(flips: int, n: int) -> float:
    """Realized corruption fraction flips/n."""
    if not 0 <= flips <= n:
        raise ValueError("flips must lie in [0, n]")
    return flips / n


def gen_patterns(m: int, n: int, rng: np.random.Generator) -> np.ndarray:
    """m independent uniform +-1 patterns of length n."""
    if m < 1 or n < 1:
        raise ValueError("need m >= 1 and n >= 1")
    return rng.integers(0, 2, size=(m, n)) * 2 - 1


def gen_probe(pattern, n: int, rho: float, rng: np.random.Generator):
    """Flip exactly max_flips(n, rho) distinct positions; returns (probe, flips)."""
    pat = np.asarray(pattern)
    if pat.size != n:
        raise ValueError("pattern length must equal n")
    flips = max_flips(n, rho)
    probe = pat.astype(np.float64).copy()
    if flips:
        pos = rng.choice(n, size=flips, replace=False)
        probe[pos] *= -1.0
    return probe, flips


@dataclass
class CapacityConfig:
    n: int
    m: int
    rho: float
    u: int
    trials: int
    shots: int = 1024
    noise: NoiseSpec | None = None
    seed: int = 0
    ancilla_mode: AncillaMode = AncillaMode.RESET

    def __post_init__(self):
        if min(self.n, self.m, self.trials, self.shots) < 1:
            raise ValueError("n, m, trials and shots must all be >= 1")
        if self.u < 0:
            raise ValueError("u must be >= 0")


@dataclass
class CapacityReport:
    n: int
    m: int
    alpha: float
    rho: float
    rho_eff: float
    u: int
    mv_accuracy: float
    density_accuracy: float
    trials: int
    shots: int
    noise_device: str | None


def sweep_schedule(n: int, u: int, rng: np.random.Generator) -> list[int]:
    """u update targets taken from consecutive random sweeps over the qubits."""
    targets: list[int] = []
    while len(targets) < u:
        targets.extend(int(t) for t in rng.permutation(n))
    return targets[:u]


def _run_trial(config: CapacityConfig, trial: int) -> tuple[bool, float]:
    rng = np.random.default_rng([config.seed, trial])
    pats = gen_patterns(config.m, config.n, rng)
    w = hopfield.hebbian(pats)
    target_pat = pats[int(rng.integers(config.m))]
    probe, _ = gen_probe(target_pat, config.n, config.rho, rng)
    targets = sweep_schedule(config.n, config.u, rng)
    recall_seed = int(rng.integers(0, 2**63))
    res = hopfield.run_recall(
        probe,
        w,
        UpdateSchedule(targets, config.ancilla_mode),
        shots=config.shots,
        seed=recall_seed,
        noise=config.noise,
    )
    hit = res.majority_vote == hopfield.pattern_bits(target_pat)
    dens = hopfield.density_accuracy(res.per_qubit_p1, target_pat)
    return hit, dens


def run_capacity(config: CapacityConfig) -> CapacityReport:
    """Average majority-vote and density accuracy over config.trials trials."""
    hits = 0
    dens_sum = 0.0
    for t in range(config.trials):
        hit, dens = _run_trial(config, t)
        hits += hit
        dens_sum += dens
    flips = max_flips(config.n, config.rho)
    return CapacityReport(
        n=config.n,
        m=config.m,
        alpha=config.m / config.n,
        rho=config.rho,
        rho_eff=rho_eff(flips, config.n),
        u=config.u,
        mv_accuracy=hits / config.trials,
        density_accuracy=dens_sum / config.trials,
        trials=config.trials,
        shots=config.shots,
        noise_device=None if config.noise is None else config.noise.device.name,
    )


def tune_u(config: CapacityConfig, u_range) -> tuple[int, list[CapacityReport]]:
    """Sweep u, return (argmax of majority-vote accuracy, full curve).

    Ties resolve to the smallest u. Every u value reuses the same per-trial
    seeds, so the sweep compares matched pattern/probe draws.
    """
    u_values = list(u_range)
    if not u_values:
        raise ValueError("u_range must be non-empty")
    curve = [run_capacity(replace(config, u=int(u))) for u in u_values]
    best = max(range(len(curve)), key=lambda i: (curve[i].mv_accuracy, -u_values[i]))
    return int(u_values[best]), curve
