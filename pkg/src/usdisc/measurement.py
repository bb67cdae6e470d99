"""Zero-error measurement operators, outcome statistics and post-measurement states.

All operators act on the span of the ensemble and are expressed in the
span coordinates of the corresponding :class:`~usdisc.ensemble.ReciprocalSet`.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .ensemble import ReciprocalSet, StateEnsemble, reciprocal_states
from .errors import Infeasible, InvalidInput
from .numcore import hermitian_eig, numerical_rank, psd_sqrt

FEASIBILITY_SLACK = 1e-9


@dataclass(frozen=True)
class ProbabilityOperator:
    matrix: np.ndarray
    max_eigenvalue: float

    @property
    def feasible(self) -> bool:
        return self.max_eigenvalue <= 1.0 + FEASIBILITY_SLACK


@dataclass(frozen=True)
class USDMeasurement:
    """Detection operators ``A_k``, inconclusive operator ``A_I`` and the ``P_k`` they realise.

    ``detection_ops[k]`` is rank one and maps ``psi_k`` onto
    ``sqrt(P_k) * detection_basis[k]``. ``basis`` lifts span coordinates
    back into the ambient space.
    """

    detection_ops: np.ndarray
    inconclusive_op: np.ndarray
    cond_probs: np.ndarray
    detection_basis: np.ndarray
    basis: np.ndarray

    @property
    def n(self) -> int:
        return self.detection_ops.shape[0]

    def effects(self) -> np.ndarray:
        """POVM elements ``A_k^dagger A_k`` followed by ``A_I^dagger A_I``."""
        ops = list(self.detection_ops) + [self.inconclusive_op]
        return np.array([a.conj().T @ a for a in ops])

    def completeness_residual(self) -> float:
        return float(np.linalg.norm(self.effects().sum(axis=0) - np.eye(self.n)))

    def orthogonalisation_op(self) -> np.ndarray:
        return self.detection_ops.sum(axis=0)

    def ambient_operators(self) -> tuple[np.ndarray, np.ndarray]:
        """Detection and inconclusive operators on the full ``C^d``.

        Outside the span the inconclusive operator acts as the identity, so
        completeness holds on the whole space.
        """
        b = self.basis
        det = np.array([b @ a @ b.conj().T for a in self.detection_ops])
        d = b.shape[0]
        inc = b @ self.inconclusive_op @ b.conj().T + (np.eye(d) - b @ b.conj().T)
        return det, inc


@dataclass(frozen=True)
class OutcomeDistribution:
    """``probs[j, k]``: probability of outcome k given preparation j.

    Columns ``0..n-1`` are detections, the last column is inconclusive.
    """

    probs: np.ndarray

    @property
    def inconclusive(self) -> np.ndarray:
        return self.probs[:, -1]

    @property
    def detection(self) -> np.ndarray:
        return self.probs[:, :-1]

    def max_error(self) -> float:
        det = self.detection
        off = det[~np.eye(det.shape[0], dtype=bool)]
        return float(off.max()) if off.size else 0.0


def _check_probs(cond_probs, n: int) -> np.ndarray:
    p = np.array(cond_probs, dtype=float).reshape(-1)
    if p.shape != (n,):
        raise InvalidInput(f"expected {n} conditional probabilities, got {p.size}")
    if np.any(~np.isfinite(p)) or np.any(p < 0) or np.any(p > 1):
        raise InvalidInput("conditional probabilities must lie in [0, 1]")
    return p


def probability_operator(recip: ReciprocalSet, cond_probs) -> ProbabilityOperator:
    """``Pi = sum_j q_j P_j |psi_perp_j><psi_perp_j|`` and its largest eigenvalue."""
    p = _check_probs(cond_probs, recip.n)
    m = recip.weighted_projector_sum(p)
    lam = hermitian_eig(m).max if np.any(p > 0) else 0.0
    return ProbabilityOperator(m, lam)


def build_measurement(ensemble: StateEnsemble, recip: ReciprocalSet | None, cond_probs) -> USDMeasurement:
    """Synthesize ``A_k = sqrt(P_k)/s_k |phi_k><psi_perp_k|`` and ``A_I = (I - Pi)^(1/2)``.

    ``|phi_k>`` is the k-th standard basis vector of the span coordinates.
    Probabilities whose operator overshoots 1 by no more than the 1e-9 slack
    are scaled down onto the boundary, and the scaled values are reported.

    Raises:
        Infeasible: if the largest eigenvalue of ``Pi`` exceeds ``1 + 1e-9``.
        DependentStates: if ``recip`` is None and the ensemble is dependent.
    """
    if recip is None:
        recip = reciprocal_states(ensemble)
    p = _check_probs(cond_probs, recip.n)
    pi = probability_operator(recip, p)
    if not pi.feasible:
        raise Infeasible(f"largest eigenvalue of the probability operator is {pi.max_eigenvalue:.12g} > 1")
    if pi.max_eigenvalue > 1.0:
        p = p / pi.max_eigenvalue
        pi = probability_operator(recip, p)

    n = recip.n
    phi = np.eye(n, dtype=complex)
    amp = np.sqrt(p) / recip.overlaps
    det = np.einsum("k,ka,kb->kab", amp, phi, recip.coords.conj())
    inc = psd_sqrt(np.eye(n) - pi.matrix)
    for a in (det, inc, p, phi):
        a.setflags(write=False)
    return USDMeasurement(det, inc, p, phi, recip.basis)


def outcome_distribution(m: USDMeasurement, ensemble: StateEnsemble) -> OutcomeDistribution:
    """Outcome probabilities ``<psi_j|A^dagger A|psi_j>`` for each prepared state."""
    if ensemble.n != m.n or ensemble.dim != m.basis.shape[0]:
        raise InvalidInput("measurement and ensemble dimensions disagree")
    c = ensemble.states @ m.basis.conj()
    effects = m.effects()
    probs = np.einsum("ja,kab,jb->jk", c.conj(), effects, c).real
    probs = np.clip(probs, 0.0, None)
    probs.setflags(write=False)
    return OutcomeDistribution(probs)


@dataclass(frozen=True)
class PostInconclusive:
    vectors: np.ndarray
    rank: int

    @property
    def dependent(self) -> bool:
        return self.rank < self.vectors.shape[0]


def post_inconclusive_states(m: USDMeasurement, ensemble: StateEnsemble, rel_tol: float = 1e-10) -> PostInconclusive:
    """Unnormalised ``A_I|psi_j>`` (rows, ambient coordinates) and the rank of their stack."""
    c = ensemble.states @ m.basis.conj()
    mapped = c @ m.inconclusive_op.T
    vectors = mapped @ m.basis.T
    return PostInconclusive(vectors, numerical_rank(vectors, rel_tol))
