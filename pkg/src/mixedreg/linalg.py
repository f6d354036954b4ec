"""Dense kernels: top-2 symmetric eigenpairs, least squares, projections, norms."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.linalg

from .errors import ConvergenceError, InvalidInputError

EIG_TOL = 1e-10
EIG_MAX_ITER = 10_000
# Extra Ritz vectors carried alongside the wanted two to speed convergence.
GUARD_VECTORS = 6
SIGN_THRESHOLD = 1e-12
DEGENERATE_GAP = 1e-8


def symmetric(m) -> np.ndarray:
    """Return ``(m + m.T) / 2`` as a float array; rejects non-square input."""
    a = np.asarray(m, dtype=float)
    if a.ndim != 2 or a.shape[0] != a.shape[1] or a.shape[0] == 0:
        raise InvalidInputError(f"expected a nonempty square matrix, got shape {a.shape}")
    if not np.all(np.isfinite(a)):
        raise InvalidInputError("matrix has non-finite entries")
    return 0.5 * (a + a.T)


def fix_sign(v: np.ndarray) -> np.ndarray:
    """Flip ``v`` so its first coordinate above ``SIGN_THRESHOLD`` is positive."""
    nz = np.flatnonzero(np.abs(v) > SIGN_THRESHOLD)
    if nz.size and v[nz[0]] < 0:
        return -v
    return v


@dataclass(frozen=True)
class EigenPair:
    value: float
    vector: np.ndarray


@dataclass(frozen=True)
class TopTwo:
    """Two leading eigenpairs; unpacks as ``first, second = top2_eig(m)``.

    ``degenerate`` is set when the two eigenvalues coincide to within
    ``1e-8 * ||M||``; the vectors are then just some orthonormal basis of
    the shared invariant subspace.
    """

    first: EigenPair
    second: EigenPair
    degenerate: bool = False
    iterations: int = 0
    residual: float = 0.0

    def __iter__(self):
        return iter((self.first, self.second))

    @property
    def values(self) -> np.ndarray:
        return np.array([self.first.value, self.second.value])

    @property
    def vectors(self) -> np.ndarray:
        """Eigenvectors as the columns of a ``(dim, 2)`` array."""
        return np.column_stack([self.first.vector, self.second.vector])


def top2_eig(m, tol: float = EIG_TOL, max_iter: int = EIG_MAX_ITER) -> TopTwo:
    """Two algebraically largest eigenpairs of a symmetric matrix.

    Block power (subspace) iteration on ``M - s I``, where ``s`` is a
    Gershgorin lower bound that makes the shifted matrix positive
    semidefinite, with a Rayleigh-Ritz projection after every step.
    Converged when both residuals ``||M v - lambda v||`` are at most
    ``tol * scale`` with ``scale <= ||M||``.
    """
    a = symmetric(m)
    n = a.shape[0]
    if n < 2:
        raise InvalidInputError("top2_eig needs dimension >= 2")

    radius = np.abs(a).sum(axis=1) - np.abs(np.diag(a))
    shift = min(float(np.min(np.diag(a) - radius)), 0.0)
    shifted = a - shift * np.eye(n)
    frob_floor = np.linalg.norm(a) / np.sqrt(n)

    b = min(n, 2 + GUARD_VECTORS)
    q, _ = np.linalg.qr(np.random.default_rng(0).standard_normal((n, b)))
    residual = np.inf
    for it in range(1, max_iter + 1):
        q, _ = np.linalg.qr(shifted @ q)
        h = q.T @ a @ q
        theta, w = np.linalg.eigh(0.5 * (h + h.T))
        order = np.argsort(theta)[::-1]
        theta, q = theta[order], q @ w[:, order]
        scale = max(abs(theta[0]), abs(theta[-1]), frob_floor)
        r = a @ q[:, :2] - q[:, :2] * theta[:2]
        residual = float(np.max(np.linalg.norm(r, axis=0)))
        if residual <= tol * scale:
            break
    else:
        raise ConvergenceError(
            f"top2_eig did not converge in {max_iter} iterations "
            f"(residual {residual:.3e})", residual=residual, iterations=max_iter)

    degenerate = bool(theta[0] - theta[1] < DEGENERATE_GAP * scale)
    v1, v2 = fix_sign(q[:, 0]), fix_sign(q[:, 1])
    return TopTwo(EigenPair(float(theta[0]), v1), EigenPair(float(theta[1]), v2),
                  degenerate=degenerate, iterations=it, residual=residual)


def least_squares(rows, targets) -> np.ndarray:
    """Minimum-norm minimizer of ``||y - X beta||_2``.

    Uses LAPACK's complete orthogonal factorization (QR with column
    pivoting), so rank-deficient systems return the minimum-norm solution.
    """
    x = np.asarray(rows, dtype=float)
    y = np.asarray(targets, dtype=float)
    if x.ndim == 1:
        x = x.reshape(1, -1)
    if x.ndim != 2 or x.shape[0] == 0 or x.shape[1] == 0:
        raise InvalidInputError("least_squares needs at least one nonempty row")
    if y.shape != (x.shape[0],):
        raise InvalidInputError(f"targets must have shape ({x.shape[0]},), got {y.shape}")
    beta, *_ = scipy.linalg.lstsq(x, y, lapack_driver="gelsy", check_finite=False)
    return beta


def project_onto_span(v, basis, tol: float = 1e-8) -> np.ndarray:
    """Orthogonal projection of ``v`` onto the span of two orthonormal vectors."""
    b = np.asarray(basis, dtype=float)
    if b.ndim != 2 or b.shape[0] != 2:
        b = b.T
    v = np.asarray(v, dtype=float)
    if b.shape != (2, v.shape[0]):
        raise InvalidInputError("basis must hold two vectors of the same length as v")
    if np.max(np.abs(b @ b.T - np.eye(2))) > tol:
        raise InvalidInputError("basis is not orthonormal")
    return (b @ v) @ b


def spectral_norm(m) -> float:
    """``max_i |lambda_i(M)|`` for symmetric ``M``."""
    a = symmetric(m)
    if a.shape[0] == 1:
        return float(abs(a[0, 0]))
    top = top2_eig(a).first.value
    bottom = -top2_eig(-a).first.value
    return float(max(abs(top), abs(bottom)))
