"""Probabilistic entanglement concentration of a bipartite pure state.

A state ``sum_j c_j |alpha_j>|beta_j>`` is rewritten as
``n^-1/2 sum_k |gamma_k>|psi_k>`` with ``|gamma_k>`` the Fourier-conjugate
basis of subsystem 1. The ``|psi_k>`` of subsystem 2 are non-orthogonal but
linearly independent; mapping them onto an orthonormal set with a common
success probability leaves a maximally entangled state.

Bipartite states are stored as coefficient matrices ``M[a, b]``, the
amplitude of ``|alpha_a>|beta_b>``. An operator ``A`` on subsystem 2 acts as
``M -> M A^T``.
"""
from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .ensemble import StateEnsemble, parse_complex, reciprocal_states
from .errors import InvalidInput, ZeroCoefficient
from .measurement import USDMeasurement, build_measurement
from .numcore import hermitian_eig

NORM_TOL = 1e-9


@dataclass(frozen=True)
class SchmidtState:
    """Schmidt coefficients ``c_0 .. c_{n-1}``, complex, unit 2-norm, all non-zero."""

    coeffs: np.ndarray

    def __post_init__(self):
        c = np.array(self.coeffs, dtype=complex).reshape(-1)
        if c.size < 1 or not np.all(np.isfinite(c)):
            raise InvalidInput("Schmidt coefficients must be a non-empty finite vector")
        norm = np.linalg.norm(c)
        if abs(norm - 1.0) > NORM_TOL:
            raise InvalidInput(f"Schmidt coefficients must have unit norm, got {norm!r}")
        if np.any(c == 0):
            raise ZeroCoefficient("all Schmidt coefficients must be non-zero")
        c.setflags(write=False)
        object.__setattr__(self, "coeffs", c)

    @classmethod
    def from_weights(cls, weights, phases=None) -> SchmidtState:
        w = np.asarray(weights, dtype=float)
        amp = np.sqrt(w / w.sum())
        if phases is not None:
            amp = amp * np.exp(1j * np.asarray(phases, dtype=float))
        return cls(amp)

    @property
    def n(self) -> int:
        return self.coeffs.size

    @property
    def weights(self) -> np.ndarray:
        return np.abs(self.coeffs) ** 2

    def coefficient_matrix(self) -> np.ndarray:
        return np.diag(self.coeffs)

    def to_json(self) -> dict:
        return {"coeffs": [{"re": float(z.real), "im": float(z.imag)} for z in self.coeffs]}


def schmidt_from_json(data) -> SchmidtState:
    if not isinstance(data, dict) or not isinstance(data.get("coeffs"), list) or not data["coeffs"]:
        raise InvalidInput("Schmidt document must be an object with a non-empty 'coeffs' array")
    return SchmidtState([parse_complex(z) for z in data["coeffs"]])


def load_schmidt(path) -> SchmidtState:
    with open(Path(path), encoding="utf-8") as fh:
        return schmidt_from_json(json.load(fh))


def schmidt_weights(m: np.ndarray) -> np.ndarray:
    """Schmidt weights (descending) of a normalised coefficient matrix."""
    w = hermitian_eig(m @ m.conj().T).eigenvalues[::-1]
    return np.clip(w, 0.0, None)


def conjugate_basis(n: int) -> np.ndarray:
    """Columns ``gamma_k[j] = n^-1/2 exp(-2 pi i j k / n)``."""
    if n < 1:
        raise ValueError("n must be positive")
    j = np.arange(n)
    return np.exp(-2j * np.pi * np.outer(j, j) / n) / np.sqrt(n)


def derived_states(s: SchmidtState) -> StateEnsemble:
    """Subsystem-2 states ``psi_k[j] = c_j exp(2 pi i j k / n)`` with uniform priors."""
    n = s.n
    j = np.arange(n)
    phases = np.exp(2j * np.pi * np.outer(j, j) / n)  # [k, j]
    return StateEnsemble(phases * s.coeffs[None, :], np.full(n, 1.0 / n))


def concentration_probability(s: SchmidtState) -> float:
    """Success probability ``n * min_j |c_j|^2``."""
    return float(s.n * s.weights.min())


def concentration_measurement(s: SchmidtState) -> USDMeasurement:
    """Zero-error measurement on the derived states with every ``P_k`` equal to ``P_C``."""
    ens = derived_states(s)
    p = concentration_probability(s)
    return build_measurement(ens, reciprocal_states(ens), np.full(s.n, min(1.0, p)))


def orthogonalisation_operator(s: SchmidtState) -> np.ndarray:
    """``A_O = sum_k A_k``: maps each ``psi_k`` onto ``sqrt(P_C) |phi_k>``."""
    return concentration_measurement(s).orthogonalisation_op()


@dataclass(frozen=True)
class ConcentrationResult:
    """Outcome of the local concentration operation.

    ``failure_matrix`` is the normalised coefficient matrix after the
    failure operator, or None when success is certain.
    """

    orthogonalisation_op: np.ndarray
    inconclusive_op: np.ndarray
    success_prob: float
    success_state: SchmidtState
    success_matrix: np.ndarray
    failure_prob: float
    failure_weights: np.ndarray | None
    failure_matrix: np.ndarray | None

    @property
    def failure_schmidt_rank(self) -> int:
        if self.failure_weights is None:
            return 0
        return int(np.count_nonzero(self.failure_weights > 1e-12))

    def to_json(self) -> dict:
        return {
            "P_C": self.success_prob,
            "failure_prob": self.failure_prob,
            "success_weights": [float(w) for w in self.success_state.weights],
            "failure_weights": None if self.failure_weights is None else [float(w) for w in self.failure_weights],
            "failure_schmidt_rank": self.failure_schmidt_rank,
            "orthogonalisation_op": [
                [{"re": float(z.real), "im": float(z.imag)} for z in row] for row in self.orthogonalisation_op
            ],
        }


def apply_concentration(s: SchmidtState) -> ConcentrationResult:
    """Apply ``A_O`` (success) and ``A_I = (I - A_O^dagger A_O)^(1/2)`` (failure) to subsystem 2."""
    m = concentration_measurement(s)
    a_o = m.orthogonalisation_op()
    a_i = m.inconclusive_op
    p_c = concentration_probability(s)
    start = s.coefficient_matrix()

    succ = start @ a_o.T
    succ_norm = np.linalg.norm(succ)
    succ = succ / succ_norm
    succ_weights = schmidt_weights(succ)
    success_state = SchmidtState(np.sqrt(succ_weights / succ_weights.sum()))

    fail_prob = 1.0 - p_c
    fail = start @ a_i.T
    fail_norm = np.linalg.norm(fail)
    if fail_prob <= 0.0 or fail_norm <= 1e-12:
        fail_matrix = fail_weights = None
    else:
        fail_matrix = fail / fail_norm
        fail_weights = schmidt_weights(fail_matrix)
    return ConcentrationResult(
        orthogonalisation_op=a_o,
        inconclusive_op=a_i,
        success_prob=p_c,
        success_state=success_state,
        success_matrix=succ,
        failure_prob=fail_prob,
        failure_weights=fail_weights,
        failure_matrix=fail_matrix,
    )
