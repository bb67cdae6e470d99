"""State ensembles, Gram matrices, the independence gate and reciprocal states."""
from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .errors import DependentStates, InvalidInput
from .numcore import hermitian_eig

NORM_TOL = 1e-9
PRIOR_TOL = 1e-12
INDEPENDENCE_TOL = 1e-10


def _frozen(a: np.ndarray) -> np.ndarray:
    a = np.array(a)
    a.setflags(write=False)
    return a


@dataclass(frozen=True)
class StateEnsemble:
    """``n`` unit-norm pure states in ``C^d`` with prior probabilities.

    ``states[j]`` is the amplitude vector of the j-th state.
    """

    states: np.ndarray
    priors: np.ndarray

    def __post_init__(self):
        states = np.asarray(self.states, dtype=complex)
        if states.ndim == 1:
            states = states[None, :]
        if states.ndim != 2 or states.shape[0] < 1:
            raise InvalidInput(f"states must be an (n, d) array, got shape {states.shape}")
        if not np.all(np.isfinite(states)):
            raise InvalidInput("state amplitudes must be finite")
        n = states.shape[0]
        norms = np.linalg.norm(states, axis=1)
        if np.any(np.abs(norms - 1.0) > NORM_TOL):
            raise InvalidInput(f"states must be unit norm, got norms {norms}")

        priors = np.asarray(self.priors, dtype=float).reshape(-1)
        if priors.shape != (n,):
            raise InvalidInput(f"expected {n} priors, got {priors.shape[0]}")
        if np.any(~np.isfinite(priors)) or np.any(priors < 0):
            raise InvalidInput("priors must be finite and non-negative")
        if abs(priors.sum() - 1.0) > PRIOR_TOL:
            raise InvalidInput(f"priors must sum to 1, got {priors.sum()!r}")

        object.__setattr__(self, "states", _frozen(states))
        object.__setattr__(self, "priors", _frozen(priors))

    @classmethod
    def uniform(cls, states) -> StateEnsemble:
        states = np.atleast_2d(np.asarray(states, dtype=complex))
        n = states.shape[0]
        return cls(states, np.full(n, 1.0 / n))

    @classmethod
    def normalized(cls, vectors, priors=None) -> StateEnsemble:
        """Build an ensemble after rescaling each vector (and the priors) to unit sum/norm."""
        v = np.atleast_2d(np.asarray(vectors, dtype=complex))
        v = v / np.linalg.norm(v, axis=1, keepdims=True)
        if priors is None:
            p = np.full(v.shape[0], 1.0 / v.shape[0])
        else:
            p = np.asarray(priors, dtype=float)
            p = p / p.sum()
        return cls(v, p)

    @property
    def n(self) -> int:
        return self.states.shape[0]

    @property
    def dim(self) -> int:
        return self.states.shape[1]

    def relabel(self, order) -> StateEnsemble:
        order = list(order)
        return StateEnsemble(self.states[order], self.priors[order])

    def to_json(self) -> dict:
        return {
            "states": [[{"re": float(z.real), "im": float(z.imag)} for z in psi] for psi in self.states],
            "priors": [float(p) for p in self.priors],
        }


def parse_complex(value) -> complex:
    if isinstance(value, bool):
        raise InvalidInput(f"not a number: {value!r}")
    if isinstance(value, (int, float)):
        return complex(value)
    if isinstance(value, dict) and set(value) <= {"re", "im"} and "re" in value:
        re, im = value["re"], value.get("im", 0.0)
        if not all(isinstance(x, (int, float)) and not isinstance(x, bool) for x in (re, im)):
            raise InvalidInput(f"complex parts must be numbers: {value!r}")
        return complex(re, im)
    raise InvalidInput(f"expected {{'re': .., 'im': ..}}, got {value!r}")


def ensemble_from_json(data) -> StateEnsemble:
    """Parse the ensemble document ``{"states": [[{re, im}, ...], ...], "priors": [...]}``.

    ``priors`` may be omitted, in which case they are uniform.
    """
    if not isinstance(data, dict) or "states" not in data:
        raise InvalidInput("ensemble document must be an object with a 'states' array")
    raw = data["states"]
    if not isinstance(raw, list) or not raw or not all(isinstance(row, list) and row for row in raw):
        raise InvalidInput("'states' must be a non-empty array of non-empty arrays")
    dims = {len(row) for row in raw}
    if len(dims) != 1:
        raise InvalidInput(f"states have inconsistent dimensions {sorted(dims)}")
    states = np.array([[parse_complex(z) for z in row] for row in raw], dtype=complex)
    priors = data.get("priors")
    if priors is None:
        priors = np.full(len(raw), 1.0 / len(raw))
    elif not isinstance(priors, list) or not all(
        isinstance(p, (int, float)) and not isinstance(p, bool) for p in priors
    ):
        raise InvalidInput("'priors' must be an array of numbers")
    return StateEnsemble(states, priors)


def load_ensemble(path) -> StateEnsemble:
    with open(Path(path), encoding="utf-8") as fh:
        return ensemble_from_json(json.load(fh))


def gram(ensemble: StateEnsemble) -> np.ndarray:
    """Gram matrix ``G[j, k] = <psi_j|psi_k>``."""
    s = ensemble.states
    g = s.conj() @ s.T
    return 0.5 * (g + g.conj().T)


@dataclass(frozen=True)
class IndependenceReport:
    independent: bool
    smallest_eigenvalue: float
    largest_eigenvalue: float
    eigenvalues: np.ndarray
    rel_tol: float

    def __bool__(self) -> bool:
        return self.independent


def check_independence(ensemble: StateEnsemble, rel_tol: float = INDEPENDENCE_TOL) -> IndependenceReport:
    """Linear independence from the Gram spectrum.

    The states are independent iff the smallest Gram eigenvalue exceeds
    ``rel_tol`` times the largest.
    """
    if rel_tol <= 0:
        raise ValueError("rel_tol must be positive")
    w = hermitian_eig(gram(ensemble)).eigenvalues
    lo, hi = float(w[0]), float(w[-1])
    return IndependenceReport(lo > rel_tol * hi, lo, hi, _frozen(w), rel_tol)


@dataclass(frozen=True)
class ReciprocalSet:
    """Reciprocal states of an independent ensemble.

    Attributes:
        vectors: ``(n, d)``; row j is the unit vector orthogonal to every
            ``psi_k`` with ``k != j``, inside the span of the ensemble.
        overlaps: ``s_j = <psi_perp_j|psi_j>``, real and positive.
        weights: ``q_j = s_j ** -2``.
        basis: ``(d, n)`` orthonormal columns spanning the ensemble. When
            ``d == n`` this is the identity and span coordinates coincide
            with the ambient ones.
        coords: ``(n, n)``; ``vectors`` expressed in ``basis``.
        state_coords: ``(n, n)``; the ensemble states expressed in ``basis``.
    """

    vectors: np.ndarray
    overlaps: np.ndarray
    weights: np.ndarray
    basis: np.ndarray
    coords: np.ndarray
    state_coords: np.ndarray

    @property
    def n(self) -> int:
        return self.coords.shape[0]

    def to_span(self, vectors) -> np.ndarray:
        """Coordinates (rows) of ambient vectors in the span basis."""
        return np.atleast_2d(np.asarray(vectors, dtype=complex)) @ self.basis.conj()

    def weighted_projector_sum(self, cond_probs=None) -> np.ndarray:
        """``sum_j q_j P_j |psi_perp_j><psi_perp_j|`` in span coordinates."""
        p = np.ones(self.n) if cond_probs is None else np.asarray(cond_probs, dtype=float)
        r = self.coords
        m = (r.T * (self.weights * p)) @ r.conj()
        return 0.5 * (m + m.conj().T)


def span_basis(ensemble: StateEnsemble, rel_tol: float = INDEPENDENCE_TOL) -> np.ndarray:
    """Orthonormal basis (columns) of the span, from the Gram eigendecomposition."""
    n, d = ensemble.n, ensemble.dim
    if d == n:
        return np.eye(n, dtype=complex)
    eig = hermitian_eig(gram(ensemble))
    if not eig.eigenvalues[0] > rel_tol * eig.eigenvalues[-1]:
        raise DependentStates("states are linearly dependent")
    b = ensemble.states.T @ (eig.eigenvectors / np.sqrt(eig.eigenvalues))
    # re-orthonormalise against round-off in ill-conditioned spans
    q, r = np.linalg.qr(b)
    return q * (np.diag(r) / np.abs(np.diag(r)))


def reciprocal_states(ensemble: StateEnsemble, rel_tol: float = INDEPENDENCE_TOL) -> ReciprocalSet:
    """Construct ``|psi_perp_j>``, the overlaps ``s_j`` and weights ``q_j``.

    The rows of the inverse coordinate matrix are the unnormalised duals
    (``<dual_j|psi_k> = delta_jk``). Normalising each dual gives
    ``s_j = 1 / ||dual_j||`` which is automatically real and positive, so
    ``q_j = ||dual_j||^2``.

    Raises:
        DependentStates: if the independence gate fails.
    """
    report = check_independence(ensemble, rel_tol)
    if not report.independent:
        raise DependentStates(
            f"states are linearly dependent (Gram eigenvalues {report.smallest_eigenvalue:.3e}"
            f" .. {report.largest_eigenvalue:.3e})"
        )
    basis = span_basis(ensemble, rel_tol)
    c = ensemble.states @ basis.conj()
    # duals[j] . c[k] = delta_jk, i.e. duals = inv(c.T)
    duals = np.linalg.inv(c.T)
    lengths = np.linalg.norm(duals, axis=1)
    coords = duals.conj() / lengths[:, None]
    overlaps = 1.0 / lengths
    weights = lengths**2
    vectors = coords @ basis.T
    return ReciprocalSet(
        vectors=_frozen(vectors),
        overlaps=_frozen(overlaps),
        weights=_frozen(weights),
        basis=_frozen(basis),
        coords=_frozen(coords),
        state_coords=_frozen(c),
    )


def random_ensemble(n: int, rng: np.random.Generator, dim: int | None = None, priors: str = "dirichlet") -> StateEnsemble:
    """Complex-Gaussian random states; priors are Dirichlet(1) or uniform."""
    d = n if dim is None else dim
    v = rng.standard_normal((n, d)) + 1j * rng.standard_normal((n, d))
    p = rng.dirichlet(np.ones(n)) if priors == "dirichlet" else None
    return StateEnsemble.normalized(v, p)
