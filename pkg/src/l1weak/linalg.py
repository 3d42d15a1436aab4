"""Dense linear-algebra kernels for the certificate and recovery solvers.

Everything is double-precision, row-major, and fully dense: the experiments
only ever touch dense Gaussian matrices, so no sparse or iterative machinery
is warranted.  Factorizations go through LAPACK (Householder QR, Cholesky);
this module adds the domain contracts on top — rank tolerances, null-space
extraction from the full QR of the transpose, and a cached row-space
projector — and raises :class:`RankDeficiencyError` instead of silently
regularizing, because every caller treats rank deficiency as a bug in the
input, not a condition to smooth over.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.linalg import cho_solve, solve_triangular

__all__ = [
    "RankDeficiencyError",
    "ScaleLimitError",
    "NullBasis",
    "RowspaceProjector",
    "qr_householder",
    "cholesky_spd",
    "least_squares",
    "nullspace_basis",
    "rowspace_projector",
]

#: Relative rank tolerance for pivot / diagonal tests (double precision at
#: desk scale: n up to a few thousand).
RANK_RTOL = 1e-12


class RankDeficiencyError(ValueError):
    """A factorization met a pivot below the relative rank tolerance."""


class ScaleLimitError(ValueError):
    """An input exceeds the documented dense-scale limit of an operation."""


def _as_matrix(name: str, a) -> np.ndarray:
    a = np.asarray(a, dtype=float)
    if a.ndim != 2:
        raise ValueError(f"{name} must be a 2-d array, got shape {a.shape}")
    if not np.all(np.isfinite(a)):
        raise ValueError(f"{name} contains non-finite entries")
    return a


def _as_vector(name: str, v, length: int | None = None) -> np.ndarray:
    v = np.asarray(v, dtype=float).ravel()
    if not np.all(np.isfinite(v)):
        raise ValueError(f"{name} contains non-finite entries")
    if length is not None and v.size != length:
        raise ValueError(f"{name} must have length {length}, got {v.size}")
    return v


def qr_householder(matrix) -> tuple[np.ndarray, np.ndarray]:
    """Economy QR via LAPACK Householder reflectors, sign-normalized.

    Returns (Q, R) with Q of shape (rows, min(rows, cols)) having orthonormal
    columns and R upper triangular with nonnegative diagonal (the sign
    normalization makes the factorization of e.g. the identity exactly
    (I, I) and the output deterministic across LAPACK builds).
    """
    m = _as_matrix("matrix", matrix)
    if m.shape[0] < 1 or m.shape[1] < 1:
        raise ValueError(f"matrix must have at least one row and column, got {m.shape}")
    q, r = np.linalg.qr(m, mode="reduced")
    signs = np.sign(np.diag(r))
    signs[signs == 0] = 1.0
    q = q * signs[np.newaxis, :]
    r = r * signs[:, np.newaxis]
    return q, r


def cholesky_spd(matrix) -> np.ndarray:
    """Lower Cholesky factor of a symmetric positive definite matrix.

    The positivity test is relative: any pivot diag(L)^2 below
    RANK_RTOL * trace(S) / m is a rank-deficiency error, even if LAPACK
    happened to complete the factorization.
    """
    s = _as_matrix("matrix", matrix)
    m = s.shape[0]
    if s.shape[0] != s.shape[1]:
        raise ValueError(f"matrix must be square, got {s.shape}")
    if m == 0:
        return np.zeros((0, 0))
    scale = max(1.0, float(np.abs(s).max()))
    if float(np.abs(s - s.T).max()) > 1e-12 * scale:
        raise ValueError("matrix is not symmetric within 1e-12")
    try:
        lower = np.linalg.cholesky(s)
    except np.linalg.LinAlgError as exc:
        raise RankDeficiencyError(f"matrix is not positive definite: {exc}") from exc
    pivots = np.diag(lower) ** 2
    threshold = RANK_RTOL * float(np.trace(s)) / m
    if float(pivots.min()) < threshold:
        raise RankDeficiencyError(
            f"pivot {pivots.min():.3e} below relative tolerance {threshold:.3e}"
        )
    return lower


def least_squares(matrix, rhs) -> np.ndarray:
    """Minimizer of ||Bx - c||_2 for a full-column-rank tall matrix, via QR."""
    b = _as_matrix("matrix", matrix)
    rows, cols = b.shape
    if rows < cols:
        raise ValueError(f"matrix must have rows >= cols, got {b.shape}")
    c = _as_vector("rhs", rhs, length=rows)
    if cols == 0:
        return np.zeros(0)
    q, r = qr_householder(b)
    diag = np.abs(np.diag(r))
    if float(diag.min()) < RANK_RTOL * max(1.0, float(np.linalg.norm(b))):
        raise RankDeficiencyError("matrix is rank deficient to working tolerance")
    return solve_triangular(r, q.T @ c, lower=False)


@dataclass(frozen=True)
class NullBasis:
    """Orthonormal basis of null(A) for an m x n matrix A with m < n.

    ``basis`` has shape (n, n - m); columns are the trailing columns of the
    full QR factorization of A^T, so A @ basis vanishes to roundoff and
    basis^T @ basis is the identity.
    """

    m: int
    n: int
    basis: np.ndarray

    @property
    def dim(self) -> int:
        return self.n - self.m


def nullspace_basis(matrix) -> NullBasis:
    """Orthonormal null-space basis from the full QR of A^T (m < n required)."""
    a = _as_matrix("matrix", matrix)
    m, n = a.shape
    if m >= n:
        raise ValueError(f"null-space basis requires m < n, got shape {a.shape}")
    if m == 0:
        basis = np.eye(n)
    else:
        q_full, r_full = np.linalg.qr(a.T, mode="complete")
        diag = np.abs(np.diag(r_full[:m, :m]))
        if float(diag.min()) < RANK_RTOL * max(1.0, float(np.linalg.norm(a))):
            raise RankDeficiencyError("matrix is not full row rank to working tolerance")
        basis = q_full[:, m:]
    basis = np.ascontiguousarray(basis)
    basis.flags.writeable = False
    return NullBasis(m=m, n=n, basis=basis)


class RowspaceProjector:
    """Orthogonal projector onto range(A^T) with a cached Cholesky of AA^T.

    Callable: u -> A^T (AA^T)^{-1} A u.  Immutable after construction, so a
    single instance is safe to share across concurrent tasks.
    ``coefficients`` returns the row-combination weights nu solving
    (AA^T) nu = A u, i.e. the nu with projection(u) = A^T nu.
    """

    def __init__(self, matrix) -> None:
        a = _as_matrix("matrix", matrix)
        m, n = a.shape
        if m > n:
            raise ValueError(f"row-space projector requires m <= n, got {a.shape}")
        self._a = a.copy()
        self._a.flags.writeable = False
        self._lower = cholesky_spd(a @ a.T)
        self.m = m
        self.n = n

    def coefficients(self, u) -> np.ndarray:
        u = _as_vector("u", u, length=self.n)
        if self.m == 0:
            return np.zeros(0)
        return cho_solve((self._lower, True), self._a @ u)

    def __call__(self, u) -> np.ndarray:
        if self.m == 0:
            return np.zeros(self.n)
        return self._a.T @ self.coefficients(u)

    def project_with_coefficients(self, u) -> tuple[np.ndarray, np.ndarray]:
        nu = self.coefficients(u)
        if self.m == 0:
            return np.zeros(self.n), nu
        return self._a.T @ nu, nu


def rowspace_projector(matrix) -> RowspaceProjector:
    """Build the cached projector onto range(A^T); A must be full row rank."""
    return RowspaceProjector(matrix)
