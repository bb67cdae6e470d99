"""Seeded Monte-Carlo sampling of preparations and measurement outcomes.

Shots are grouped into fixed-size blocks; block ``b`` draws from a PCG64
stream seeded by ``SeedSequence([seed, b])``. Blocks may run on any number
of threads and their tallies are summed, so the report depends only on
``(seed, shots)`` and never on the thread count.
"""
from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from .concentration import SchmidtState, concentration_probability
from .ensemble import StateEnsemble
from .measurement import USDMeasurement, outcome_distribution

GENERATOR = "numpy.random.PCG64"
BLOCK_SHOTS = 1 << 16
ZERO_CLAMP = 1e-9


@dataclass(frozen=True)
class SimulationReport:
    """Tallies of sampled events.

    ``tallies[j, k]`` counts preparations ``j`` that produced outcome ``k``;
    ``outcome_labels`` names the columns.
    """

    shots: int
    seed: int
    generator: str
    tallies: np.ndarray
    outcome_labels: tuple[str, ...]
    error_count: int
    empirical_P_D: float

    def frequencies(self) -> np.ndarray:
        return self.tallies / self.shots

    def to_json(self) -> dict:
        return {
            "shots": self.shots,
            "seed": self.seed,
            "generator": self.generator,
            "outcome_labels": list(self.outcome_labels),
            "tallies": self.tallies.tolist(),
            "error_count": self.error_count,
            "empirical_P_D": self.empirical_P_D,
        }


def _blocks(shots: int) -> list[tuple[int, int]]:
    return [(b, min(BLOCK_SHOTS, shots - start)) for b, start in enumerate(range(0, shots, BLOCK_SHOTS))]


def _rng(seed: int, block: int) -> np.random.Generator:
    return np.random.Generator(np.random.PCG64(np.random.SeedSequence([seed & (2**64 - 1), block])))


def _run_blocks(work, shots: int, threads: int) -> np.ndarray:
    blocks = _blocks(shots)
    if threads <= 1 or len(blocks) == 1:
        parts = [work(b, size) for b, size in blocks]
    else:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            parts = list(pool.map(lambda bs: work(*bs), blocks))
    return np.sum(parts, axis=0)


def sampling_table(m: USDMeasurement, ensemble: StateEnsemble) -> np.ndarray:
    """Outcome rows with probabilities below 1e-9 set to exactly zero and renormalised."""
    probs = np.array(outcome_distribution(m, ensemble).probs)
    probs[probs < ZERO_CLAMP] = 0.0
    return probs / probs.sum(axis=1, keepdims=True)


def simulate(m: USDMeasurement, ensemble: StateEnsemble, shots: int, seed: int = 42, threads: int = 1) -> SimulationReport:
    """Sample ``shots`` preparations from the priors and one outcome per preparation."""
    if shots < 1:
        raise ValueError("shots must be at least 1")
    n = ensemble.n
    table = sampling_table(m, ensemble)
    cdf = np.cumsum(table, axis=1)
    cdf[:, -1] = 1.0
    priors = np.asarray(ensemble.priors)

    def work(block: int, size: int) -> np.ndarray:
        rng = _rng(seed, block)
        prepared = rng.choice(n, size=size, p=priors)
        u = rng.random(size)
        outcome = np.sum(u[:, None] >= cdf[prepared], axis=1)
        return np.bincount(prepared * (n + 1) + outcome, minlength=n * (n + 1)).reshape(n, n + 1)

    tallies = _run_blocks(work, shots, threads)
    detected = tallies[:, :n]
    correct = int(np.trace(detected))
    errors = int(detected.sum() - correct)
    labels = tuple(str(k) for k in range(n)) + ("inconclusive",)
    return SimulationReport(int(shots), int(seed), GENERATOR, tallies, labels, errors, correct / shots)


def simulate_concentration(s: SchmidtState, shots: int, seed: int = 42, threads: int = 1) -> SimulationReport:
    """Bernoulli sampling of success/failure at rate ``P_C``."""
    if shots < 1:
        raise ValueError("shots must be at least 1")
    p_c = min(1.0, concentration_probability(s))

    def work(block: int, size: int) -> np.ndarray:
        hits = int(_rng(seed, block).binomial(size, p_c))
        return np.array([[hits, size - hits]])

    tallies = _run_blocks(work, shots, threads)
    return SimulationReport(
        int(shots), int(seed), GENERATOR, tallies, ("success", "failure"), 0, int(tallies[0, 0]) / shots
    )
