import numpy as np
import pytest

from usdisc.concentration import SchmidtState
from usdisc.ensemble import StateEnsemble, random_ensemble

THETA = np.pi / 8
OVERLAP = np.cos(2 * THETA)  # 0.70711


def pair(theta=THETA, eta_plus=0.5):
    """``cos(theta)|+> +- sin(theta)|->`` with priors ``(eta_plus, 1 - eta_plus)``."""
    c, s = np.cos(theta), np.sin(theta)
    return StateEnsemble([[c, s], [c, -s]], [eta_plus, 1.0 - eta_plus])


def orthonormal(n, priors=None):
    states = np.eye(n, dtype=complex)
    return StateEnsemble(states, np.full(n, 1.0 / n) if priors is None else priors)


def random_schmidt(rng, n):
    w = rng.uniform(0.02, 1.0, size=n)
    return SchmidtState.from_weights(w, rng.uniform(0, 2 * np.pi, size=n))


@pytest.fixture
def rng():
    return np.random.default_rng(20240917)


@pytest.fixture
def js_pair():
    return pair()


@pytest.fixture
def three_weights():
    return SchmidtState.from_weights([0.5, 0.3, 0.2])


__all__ = ["pair", "orthonormal", "random_ensemble", "random_schmidt", "THETA", "OVERLAP"]


def pytest_terminal_summary(terminalreporter):
    from test_acceptance import RESULTS

    if RESULTS:
        terminalreporter.section("acceptance criteria")
        for number in sorted(RESULTS):
            terminalreporter.write_line(RESULTS[number])
