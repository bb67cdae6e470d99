"""Two-state reference values: IDP inconclusive rate, Helstrom bound, error/inconclusive tradeoff."""
from __future__ import annotations

import math

import numpy as np

from .ensemble import StateEnsemble
from .errors import DomainError, WrongArity


def pair_overlap(ensemble: StateEnsemble) -> float:
    if ensemble.n != 2:
        raise WrongArity(f"expected two states, got {ensemble.n}")
    a, b = ensemble.states
    return float(min(1.0, abs(np.vdot(a, b))))


def idp_bound(ensemble: StateEnsemble) -> float:
    """Minimum inconclusive probability for two equiprobable states, ``|<psi_+|psi_->|``."""
    return pair_overlap(ensemble)


def helstrom_bound(overlap: float) -> float:
    """Minimum error probability of any two-state strategy with equal priors."""
    if not 0.0 <= overlap <= 1.0:
        raise DomainError(f"overlap must lie in [0, 1], got {overlap}")
    return 0.5 * (1.0 - math.sqrt(1.0 - overlap * overlap))


def error_tradeoff(p_inconclusive: float, overlap: float) -> float:
    """Smallest error probability compatible with a fixed inconclusive rate.

    Solves ``P_E (1 - P_I - P_E) = (overlap - P_I)^2 / 4`` for its smaller
    root. ``P_I = 0`` gives the Helstrom bound and ``P_I = overlap`` gives 0.
    """
    if not 0.0 <= overlap <= 1.0:
        raise DomainError(f"overlap must lie in [0, 1], got {overlap}")
    if not 0.0 <= p_inconclusive <= overlap:
        raise DomainError(f"inconclusive probability {p_inconclusive} outside [0, {overlap}]")
    a = 1.0 - p_inconclusive
    gap = overlap - p_inconclusive
    # a^2 - gap^2 >= 0 because overlap <= 1
    disc = max(0.0, (a - gap) * (a + gap))
    root = math.sqrt(disc)
    # (a - root)/2 rewritten to avoid cancellation when gap is small
    return 0.5 * gap * gap / (a + root) if a + root > 0 else 0.0


def tradeoff_curve(overlap: float, samples: int = 11) -> list[tuple[float, float]]:
    """``(P_I, P_E)`` pairs on an even grid of ``P_I`` from 0 to the overlap."""
    if samples < 2:
        raise DomainError("need at least two samples")
    return [(float(pi), error_tradeoff(float(pi), overlap)) for pi in np.linspace(0.0, overlap, samples)]
