"""Optimal conditional probabilities for zero-error discrimination.

The problem is

    maximise    sum_j eta_j P_j
    subject to  largest eigenvalue of Pi(P) <= 1,   P_j >= 0,

with ``Pi(P) = sum_j q_j P_j |psi_perp_j><psi_perp_j|``. ``Pi`` is affine in
``P`` so the feasible set is convex and the objective linear. Two states and
the equal-``P`` family have closed forms; the general case is solved with a
log-barrier interior-point method, and ``grid_oracle`` gives a brute-force
reference that shares no code with it.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .bounds import pair_overlap
from .ensemble import ReciprocalSet, StateEnsemble, gram, reciprocal_states
from .errors import NoConvergence, TooLarge, WrongArity
from .measurement import probability_operator
from .numcore import hermitian_eig

METHODS = ("two-state-closed-form", "equal-p", "general-iterative", "grid-oracle")


@dataclass(frozen=True)
class OptimizationResult:
    cond_probs: np.ndarray
    discrimination_prob: float
    inconclusive_prob: float
    boundary_eigenvalue: float
    method: str

    def to_json(self) -> dict:
        return {
            "method": self.method,
            "P_D": self.discrimination_prob,
            "P_I": self.inconclusive_prob,
            "cond_probs": [float(p) for p in self.cond_probs],
            "boundary_eigenvalue": self.boundary_eigenvalue,
        }


def _result(p, priors, lam, method) -> OptimizationResult:
    p = np.clip(np.asarray(p, dtype=float), 0.0, 1.0)
    p.setflags(write=False)
    pd = float(np.dot(priors, p))
    return OptimizationResult(p, pd, 1.0 - pd, float(lam), method)


def jaeger_shimony(ensemble: StateEnsemble) -> OptimizationResult:
    """Closed-form optimum for two states with arbitrary priors.

    With the likelier state labelled ``+`` and overlap ``c``: if
    ``sqrt(eta_-/eta_+) >= c`` the optimum lies on ``(1-P_+)(1-P_-) = c^2``
    with ``P_I = 2 sqrt(eta_+ eta_-) c``; otherwise only the likelier state is
    ever detected, ``P_+ = 1 - c^2``, ``P_- = 0`` and ``P_I = eta_+ c^2 + eta_-``.
    Probabilities are reported in the caller's ordering.
    """
    c = pair_overlap(ensemble)
    eta = ensemble.priors
    hi, lo = (0, 1) if eta[0] >= eta[1] else (1, 0)
    eta_hi, eta_lo = float(eta[hi]), float(eta[lo])

    p = np.zeros(2)
    if c == 0.0:
        p[:] = 1.0
    elif math.sqrt(eta_lo / eta_hi) >= c:
        ratio = math.sqrt(eta_lo / eta_hi)
        p[hi] = 1.0 - c * ratio
        p[lo] = 1.0 - c / ratio
    else:
        p[hi] = 1.0 - c * c
        p[lo] = 0.0

    lam = 0.0 if not np.any(p > 0) else probability_operator(reciprocal_states(ensemble), np.clip(p, 0, 1)).max_eigenvalue
    return _result(p, eta, lam, "two-state-closed-form")


def js_inconclusive(eta_plus: float, eta_minus: float, overlap: float) -> float:
    """Minimum inconclusive probability for two states, from priors and overlap alone."""
    hi, lo = max(eta_plus, eta_minus), min(eta_plus, eta_minus)
    if math.sqrt(lo / hi) >= overlap:
        return 2.0 * math.sqrt(hi * lo) * overlap
    return hi * overlap * overlap + lo


def equal_p_solution(recip: ReciprocalSet, priors=None) -> OptimizationResult:
    """Best common ``P`` for all states: the reciprocal of ``lambda_max(sum_j q_j |psi_perp_j><psi_perp_j|)``."""
    lam_unit = hermitian_eig(recip.weighted_projector_sum()).max
    p = min(1.0, 1.0 / lam_unit)
    probs = np.full(recip.n, p)
    lam = probability_operator(recip, probs).max_eigenvalue
    eta = np.full(recip.n, 1.0 / recip.n) if priors is None else np.asarray(priors, dtype=float)
    return _result(probs, eta, lam, "equal-p")


# Barrier-method settings. The final duality gap is 2n / t. At large t the
# barrier value grows like t, and Newton decrements below its round-off are
# treated as converged, as is a line search that stalls.
_GAP = 1e-9
_T0 = 1.0
_T_GROWTH = 8.0
_NEWTON_TOL = 1e-10
_MAX_NEWTON = 100
_MAX_TOTAL = 100_000
_MIN_STEP = 1e-8


def _barrier_terms(p, t, eta, r):
    """Value, gradient and Hessian of ``-t eta.P - sum log P - log det(I - Pi(P))``.

    ``r`` holds the scaled duals ``sqrt(q_j) psi_perp_j`` as columns, so
    ``Pi(P) = r diag(P) r^dagger``.
    """
    n = p.size
    m = np.eye(n) - (r * p) @ r.conj().T
    try:
        chol = np.linalg.cholesky(m)
    except np.linalg.LinAlgError:
        return None
    logdet = 2.0 * np.sum(np.log(np.abs(np.diag(chol))))
    x = np.linalg.solve(chol, r)
    y = x.conj().T @ x  # r^dagger (I - Pi)^-1 r
    value = -t * eta @ p - np.sum(np.log(p)) - logdet
    grad = -t * eta - 1.0 / p + y.diagonal().real
    hess = np.diag(1.0 / p**2) + np.abs(y) ** 2
    return value, grad, hess


def _feasible_interior(p, r) -> bool:
    if np.any(p <= 0):
        return False
    m = np.eye(p.size) - (r * p) @ r.conj().T
    try:
        np.linalg.cholesky(m)
    except np.linalg.LinAlgError:
        return False
    return True


def _barrier_solve(eta: np.ndarray, r: np.ndarray, p0: np.ndarray) -> np.ndarray:
    n = eta.size
    p = p0.copy()
    t = _T0
    total = 0
    while True:
        for _ in range(_MAX_NEWTON):
            total += 1
            if total > _MAX_TOTAL:
                raise NoConvergence("barrier iteration exceeded its budget")
            value, grad, hess = _barrier_terms(p, t, eta, r)
            step = -np.linalg.solve(hess, grad)
            decrement = -grad @ step
            # a decrement below the resolution of the barrier value cannot be acted on
            if decrement / 2.0 <= max(_NEWTON_TOL, 8.0 * np.finfo(float).eps * abs(value)):
                break
            alpha = 1.0
            # a failed line search means the decrement is at its round-off floor
            while alpha > _MIN_STEP:
                cand = p + alpha * step
                if _feasible_interior(cand, r):
                    terms = _barrier_terms(cand, t, eta, r)
                    if terms is not None and terms[0] <= value - 0.25 * alpha * decrement:
                        break
                alpha *= 0.5
            else:
                break
            if np.array_equal(cand, p):
                break
            p = cand
        else:
            raise NoConvergence("Newton centering did not converge")
        if 2.0 * n / t < _GAP:
            return p
        t *= _T_GROWTH


def optimize_general(ensemble: StateEnsemble, recip: ReciprocalSet | None = None) -> OptimizationResult:
    """Maximise ``sum_j eta_j P_j`` over the feasible set for any independent ensemble.

    A log-barrier interior-point method on ``P > 0``, ``I - Pi(P) > 0``,
    followed by scaling ``P`` up to the boundary ``lambda = 1``. The duality
    gap at exit is below 1e-9.

    Raises:
        DependentStates: if the ensemble is linearly dependent.
        NoConvergence: if the Newton iterations exceed their budget.
    """
    if recip is None:
        recip = reciprocal_states(ensemble)
    eta = np.asarray(ensemble.priors, dtype=float)
    r = (recip.coords * np.sqrt(recip.weights)[:, None]).T
    lam_unit = hermitian_eig(recip.weighted_projector_sum()).max
    p0 = np.full(recip.n, 0.5 / lam_unit)

    p = _barrier_solve(eta, r, p0)
    lam = probability_operator(recip, np.clip(p, 0.0, 1.0)).max_eigenvalue
    p = np.clip(p / lam, 0.0, 1.0)
    lam = probability_operator(recip, p).max_eigenvalue
    return _result(p, eta, lam, "general-iterative")


def _pi_eigenvalue_from_gram(g: np.ndarray, p: np.ndarray) -> float:
    """``lambda_max(Pi(P))`` via ``diag(sqrt P) G^-1 diag(sqrt P)``, which is similar to ``Pi``."""
    s = np.sqrt(p)
    m = s[:, None] * np.linalg.inv(g) * s[None, :]
    return float(np.linalg.eigvalsh(0.5 * (m + m.conj().T))[-1])


def _schur_last(g_hh, g_ht, g_tt, pts):
    """For each row of ``pts``: is ``M = G_hh - diag(pts)`` positive definite,
    and the largest feasible last coordinate ``g_tt - g_ht^dagger M^-1 g_ht``."""
    head = pts.shape[1]
    if head == 1:
        a = g_hh[0, 0].real - pts[:, 0]
        ok = a > 0
        with np.errstate(divide="ignore", invalid="ignore"):
            schur = g_tt - np.abs(g_ht[0]) ** 2 / a
        return ok, schur
    if head == 2:
        a = g_hh[0, 0].real - pts[:, 0]
        c = g_hh[1, 1].real - pts[:, 1]
        b = g_hh[0, 1]
        det = a * c - abs(b) ** 2
        ok = (a > 0) & (det > 0)
        u, v = g_ht
        # u^* (M^-1) u-form for M = [[a, b], [b^*, c]]
        quad = c * abs(u) ** 2 + a * abs(v) ** 2 - 2.0 * (np.conj(u) * b * v).real
        with np.errstate(divide="ignore", invalid="ignore"):
            schur = g_tt - quad / det
        return ok, schur
    m = g_hh[None, :, :] - np.einsum("ij,kj->ijk", pts, np.eye(head))
    ok = np.linalg.eigvalsh(m)[:, 0] > 0
    schur = np.full(pts.shape[0], -np.inf)
    if np.any(ok):
        sol = np.linalg.solve(m[ok], np.broadcast_to(g_ht, (int(ok.sum()), head))[..., None])[..., 0]
        schur[ok] = g_tt - np.einsum("i,ki->k", g_ht.conj(), sol).real
    return ok, schur


def grid_oracle(ensemble: StateEnsemble, resolution: float = 1e-3, slack: float = 1e-9) -> OptimizationResult:
    """Best feasible point of the grid ``{0, h, 2h, ..., 1}^n``.

    Feasibility ``lambda(P) <= 1 + slack`` is tested through the Gram
    matrix: ``lambda(P) <= c`` iff ``c G - diag(P)`` is positive
    semidefinite. Since lowering any ``P_j`` keeps a point feasible and the
    objective has non-negative weights, the best grid point is found by
    enumerating the first ``n - 1`` coordinates and taking the largest
    feasible grid value of the last one, obtained from a Schur complement.

    Raises:
        TooLarge: if ``n > 4``.
    """
    n = ensemble.n
    if n > 4:
        raise TooLarge(f"grid oracle supports at most 4 states, got {n}")
    if not 0 < resolution <= 1:
        raise ValueError("resolution must lie in (0, 1]")
    steps = int(math.ceil(1.0 / resolution - 1e-9))
    levels = np.linspace(0.0, 1.0, steps + 1)
    g = (1.0 + slack) * gram(ensemble)
    eta = ensemble.priors

    best_val, best_p = -1.0, None
    head = n - 1
    if head == 0:
        cand = np.array([levels[int(math.floor(min(1.0, g[0, 0].real) * steps + 1e-9))]])
        best_val, best_p = float(eta @ cand), cand
    else:
        g_hh = g[:head, :head]
        g_ht = g[:head, head]
        g_tt = g[head, head].real
        chunk = max(1, 2_000_000 // (steps + 1) ** (head - 1))
        for first in range(0, steps + 1, chunk):
            idx_first = levels[first:first + chunk]
            grids = [idx_first] + [levels] * (head - 1)
            pts = np.array(np.meshgrid(*grids, indexing="ij")).reshape(head, -1).T
            ok, schur = _schur_last(g_hh, g_ht, g_tt, pts)
            if not np.any(ok):
                continue
            pts, schur = pts[ok], schur[ok]
            top = np.minimum(1.0, schur)
            keep = top >= 0
            if not np.any(keep):
                continue
            pts, top = pts[keep], top[keep]
            last = np.floor(top * steps + 1e-9) / steps
            vals = pts @ eta[:head] + eta[head] * last
            i = int(np.argmax(vals))
            if vals[i] > best_val:
                best_val, best_p = float(vals[i]), np.append(pts[i], last[i])

    lam = _pi_eigenvalue_from_gram(gram(ensemble), best_p) if np.any(best_p > 0) else 0.0
    return _result(best_p, eta, lam, "grid-oracle")


@dataclass(frozen=True)
class EmbeddingReport:
    restricted_pd: float
    max_embedded_pd: float
    min_lambda_gap: float
    trials: int
    extra_dims: int
    seed: int

    @property
    def passed(self) -> bool:
        return self.max_embedded_pd <= self.restricted_pd + 1e-9 and self.min_lambda_gap >= -1e-9


def embedding_no_gain_check(
    ensemble: StateEnsemble,
    extra_dims: int = 2,
    trials: int = 1000,
    seed: int = 0,
    *,
    mix: bool = True,
    restricted: OptimizationResult | None = None,
) -> EmbeddingReport:
    """Compare the restricted optimum with measurements using extra dimensions.

    Each trial replaces ``psi_perp_j`` by ``mu_j psi_perp_j + nu_j chi_j`` with
    ``chi_j`` a random unit vector orthogonal to the span and
    ``|mu_j|^2 + |nu_j|^2 = 1``. The detection weight becomes
    ``q_j / |mu_j|^2`` so that the operator still detects ``psi_j`` with
    probability ``P_j``. The enlarged operator is built at the restricted
    optimum, its largest eigenvalue ``lambda_S`` recorded, and the embedded
    ``P_D`` obtained by scaling back to ``lambda_S = 1``.

    With ``mix=False`` every ``nu_j`` is zero, which reproduces the restricted
    measurement exactly.
    """
    if extra_dims < 1 or trials < 1:
        raise ValueError("extra_dims and trials must be positive")
    recip = reciprocal_states(ensemble)
    if restricted is None:
        restricted = optimize_general(ensemble, recip)
    p = np.asarray(restricted.cond_probs)
    lam = probability_operator(recip, p).max_eigenvalue
    n = recip.n
    big = n + extra_dims

    max_pd = -np.inf
    min_gap = np.inf
    for trial in range(trials):
        rng = np.random.default_rng(np.random.SeedSequence([seed & (2**64 - 1), trial]))
        if mix:
            mu_sq = rng.uniform(1e-3, 1.0, size=n)
            chi = rng.standard_normal((n, extra_dims)) + 1j * rng.standard_normal((n, extra_dims))
            chi /= np.linalg.norm(chi, axis=1, keepdims=True)
            mu = np.sqrt(mu_sq) * np.exp(2j * np.pi * rng.random(n))
            nu = np.sqrt(1.0 - mu_sq) * np.exp(2j * np.pi * rng.random(n))
        else:
            mu_sq = np.ones(n)
            chi = np.zeros((n, extra_dims), dtype=complex)
            mu = np.ones(n, dtype=complex)
            nu = np.zeros(n, dtype=complex)
        vecs = np.zeros((n, big), dtype=complex)
        vecs[:, :n] = mu[:, None] * recip.coords
        vecs[:, n:] = nu[:, None] * chi
        w = recip.weights / mu_sq * p
        pi_s = (vecs.T * w) @ vecs.conj()
        lam_s = hermitian_eig(0.5 * (pi_s + pi_s.conj().T)).max
        min_gap = min(min_gap, lam_s - lam)
        pd = restricted.discrimination_prob / lam_s if lam_s > 0 else restricted.discrimination_prob
        max_pd = max(max_pd, pd)

    return EmbeddingReport(restricted.discrimination_prob, float(max_pd), float(min_gap), trials, extra_dims, seed)


def optimize(
    ensemble: StateEnsemble,
    method: str | None = None,
    *,
    rel_tol: float = 1e-10,
    resolution: float = 1e-3,
) -> OptimizationResult:
    """Dispatch: closed form for two states, the barrier method otherwise."""
    if method is None:
        method = "two-state-closed-form" if ensemble.n == 2 else "general-iterative"
    if method not in METHODS:
        raise ValueError(f"unknown method {method!r}; expected one of {METHODS}")
    if method == "two-state-closed-form" and ensemble.n != 2:
        raise WrongArity("the closed form applies to exactly two states")
    # every method requires an independent ensemble
    recip = reciprocal_states(ensemble, rel_tol)
    if method == "two-state-closed-form":
        return jaeger_shimony(ensemble)
    if method == "equal-p":
        return equal_p_solution(recip, ensemble.priors)
    if method == "general-iterative":
        return optimize_general(ensemble, recip)
    return grid_oracle(ensemble, resolution)
