"""Dense complex-matrix primitives: Hermitian eigensolver, PSD square root, rank.

The eigensolver is a cyclic Jacobi iteration. Matrices in this package are
small (a few dozen rows at most), where Jacobi is accurate to working
precision and converges unconditionally for Hermitian input.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import NoConvergence, NotHermitian, NotPSD

HERMITIAN_TOL = 1e-8
PSD_CLAMP = 1e-10
MAX_SWEEPS = 100


@dataclass(frozen=True)
class HermitianEig:
    """Eigendecomposition ``H = V diag(eigenvalues) V^dagger``.

    Eigenvalues are real and ascending; ``eigenvectors[:, i]`` belongs to
    ``eigenvalues[i]``.
    """

    eigenvalues: np.ndarray
    eigenvectors: np.ndarray

    @property
    def max(self) -> float:
        return float(self.eigenvalues[-1])

    @property
    def min(self) -> float:
        return float(self.eigenvalues[0])

    def reconstruct(self) -> np.ndarray:
        v = self.eigenvectors
        return (v * self.eigenvalues) @ v.conj().T


def as_matrix(m) -> np.ndarray:
    """Coerce to a 2-D complex array and reject NaN/Inf entries."""
    a = np.asarray(m, dtype=complex)
    if a.ndim != 2:
        raise ValueError(f"expected a 2-D matrix, got shape {a.shape}")
    if not np.all(np.isfinite(a)):
        raise ValueError("matrix has non-finite entries")
    return a


def hermitian_eig(h, *, max_sweeps: int = MAX_SWEEPS) -> HermitianEig:
    """Eigendecomposition of a Hermitian matrix by cyclic Jacobi rotations.

    Args:
        h: square matrix with ``||h - h^dagger||_F <= 1e-8 max(1, ||h||_F)``.
        max_sweeps: iteration budget, counted in full sweeps over all pivots.

    Returns:
        HermitianEig with ascending eigenvalues and orthonormal eigenvectors.

    Raises:
        NotHermitian: if ``h`` is not square or not Hermitian within tolerance.
        NoConvergence: if the off-diagonal mass does not vanish in time.
    """
    a = as_matrix(h)
    n, m = a.shape
    if n != m:
        raise NotHermitian(f"matrix is not square: {a.shape}")
    scale = np.linalg.norm(a)
    if np.linalg.norm(a - a.conj().T) > HERMITIAN_TOL * max(1.0, scale):
        raise NotHermitian("matrix is not Hermitian within tolerance")

    a = 0.5 * (a + a.conj().T)
    v = np.eye(n, dtype=complex)
    if n == 0:
        return HermitianEig(np.zeros(0), v)

    # stop when the off-diagonal Frobenius mass is at round-off level
    target = (1e-15 * max(scale, np.finfo(float).tiny)) ** 2
    for _ in range(max_sweeps + 1):
        off = np.sum(np.abs(a[~np.eye(n, dtype=bool)]) ** 2)
        if off <= target:
            break
        for p in range(n - 1):
            for q in range(p + 1, n):
                apq = a[p, q]
                mag = abs(apq)
                if mag == 0.0:
                    continue
                app = a[p, p].real
                aqq = a[q, q].real
                # skip pivots already negligible against both diagonals
                if mag < 1e-18 * (abs(app) + abs(aqq)):
                    a[p, q] = a[q, p] = 0.0
                    continue
                phase = apq / mag
                tau = (aqq - app) / (2.0 * mag)
                t = (1.0 if tau >= 0 else -1.0) / (abs(tau) + np.sqrt(1.0 + tau * tau))
                c = 1.0 / np.sqrt(1.0 + t * t)
                s = t * c
                # unitary acting on columns (p, q): diag(1, conj(phase)) @ [[c, s], [-s, c]]
                u = np.array([[c, s], [-s * phase.conjugate(), c * phase.conjugate()]])
                idx = [p, q]
                a[:, idx] = a[:, idx] @ u
                a[idx, :] = u.conj().T @ a[idx, :]
                a[p, q] = a[q, p] = 0.0
                a[p, p] = a[p, p].real
                a[q, q] = a[q, q].real
                v[:, idx] = v[:, idx] @ u
    else:
        raise NoConvergence(f"Jacobi iteration did not converge in {max_sweeps} sweeps")

    w = np.diag(a).real.copy()
    order = np.argsort(w, kind="stable")
    return HermitianEig(w[order], v[:, order])


def max_eigenvalue(h) -> float:
    return hermitian_eig(h).max


def psd_sqrt(h) -> np.ndarray:
    """Principal square root of a Hermitian positive semidefinite matrix.

    Eigenvalues within 1e-10 of zero (either sign) are treated as exact
    zeros, so operators such as ``I - Pi`` evaluated on the feasibility
    boundary keep their exact kernel.

    Raises:
        NotPSD: if an eigenvalue lies below -1e-10.
    """
    eig = hermitian_eig(h)
    w = eig.eigenvalues
    if w.size and w[0] < -PSD_CLAMP:
        raise NotPSD(f"smallest eigenvalue {w[0]:.3e} is below -{PSD_CLAMP:g}")
    w = np.where(np.abs(w) <= PSD_CLAMP, 0.0, w)
    vecs = eig.eigenvectors
    r = (vecs * np.sqrt(w)) @ vecs.conj().T
    return 0.5 * (r + r.conj().T)


def singular_values(m) -> np.ndarray:
    """Singular values in descending order."""
    a = as_matrix(m)
    if a.size == 0:
        return np.zeros(0)
    return np.linalg.svd(a, compute_uv=False)


def numerical_rank(m, rel_tol: float = 1e-10) -> int:
    """Number of singular values above ``rel_tol`` times the largest one."""
    if rel_tol <= 0:
        raise ValueError("rel_tol must be positive")
    sv = singular_values(m)
    if sv.size == 0 or sv[0] == 0.0:
        return 0
    return int(np.count_nonzero(sv > rel_tol * sv[0]))


def random_unitary(n: int, rng: np.random.Generator) -> np.ndarray:
    """Haar-random unitary via QR of a complex Gaussian matrix."""
    z = (rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))) / np.sqrt(2)
    q, r = np.linalg.qr(z)
    d = np.diag(r)
    return q * (d / np.abs(d))
