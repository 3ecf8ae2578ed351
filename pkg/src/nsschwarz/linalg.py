"""Dense real linear-algebra kernels.

Matrices are plain 2-D ``float64`` numpy arrays. The factorization and
eigenvalue routines delegate to LAPACK through scipy/numpy; this module adds
the pivot-based singularity test, dimension checks and the small result
types the rest of the package relies on.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np
import scipy.linalg as sla

from .errors import ConvergenceFailure, DimensionMismatch, SingularMatrix

#: relative pivot threshold used to declare a matrix singular
PIVOT_TOL = 1e-14


def as_matrix(M, square=False) -> np.ndarray:
    """Validate and return ``M`` as a finite 2-D float64 array."""
    M = np.asarray(M, dtype=np.float64)
    if M.ndim != 2:
        raise DimensionMismatch(f"expected a 2-D matrix, got shape {M.shape}")
    if square and M.shape[0] != M.shape[1]:
        raise DimensionMismatch(f"expected a square matrix, got shape {M.shape}")
    if not np.all(np.isfinite(M)):
        raise ValueError("matrix has non-finite entries")
    return M


@dataclass(frozen=True)
class LUFactors:
    """Packed LU factors with row pivots, as produced by LAPACK ``getrf``."""

    factors: np.ndarray
    pivots: np.ndarray
    dimension: int

    def unpack(self):
        """Return ``(P, L, U)`` with ``M = P @ L @ U``."""
        n = self.dimension
        L = np.tril(self.factors, -1) + np.eye(n)
        U = np.triu(self.factors)
        perm = np.arange(n)
        for i, p in enumerate(self.pivots):
            perm[i], perm[p] = perm[p], perm[i]
        P = np.zeros((n, n))
        P[perm, np.arange(n)] = 1.0
        return P, L, U


@dataclass(frozen=True)
class Spectrum:
    """Eigenvalues of a real square matrix, stored as a complex array."""

    eigenvalues: np.ndarray

    def __len__(self):
        return len(self.eigenvalues)

    @property
    def re(self):
        return self.eigenvalues.real

    @property
    def im(self):
        return self.eigenvalues.imag

    @property
    def spectral_radius(self) -> float:
        return float(np.max(np.abs(self.eigenvalues))) if len(self) else 0.0

    @property
    def diameter(self) -> float:
        """Largest pairwise distance between eigenvalues in the complex plane."""
        lam = self.eigenvalues
        if len(lam) < 2:
            return 0.0
        best = 0.0
        for start in range(0, len(lam), 256):
            block = lam[start:start + 256]
            best = max(best, float(np.max(np.abs(block[:, None] - lam[None, :]))))
        return best


def lu_factor(M) -> LUFactors:
    """LU factorization with partial pivoting.

    Raises SingularMatrix when a pivot falls below ``PIVOT_TOL * max|M|``.
    """
    M = as_matrix(M, square=True)
    n = M.shape[0]
    if n == 0:
        raise DimensionMismatch("cannot factor an empty matrix")
    scale = float(np.max(np.abs(M)))
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", sla.LinAlgWarning)
        lu, piv = sla.lu_factor(M, check_finite=False)
    pivots = np.abs(np.diag(lu))
    if scale == 0.0 or np.min(pivots) < PIVOT_TOL * scale:
        raise SingularMatrix(
            f"pivot {np.min(pivots):.3e} below {PIVOT_TOL:g} x max|M| = {scale:.3e}"
        )
    return LUFactors(lu, piv, n)


def lu_solve(F: LUFactors, rhs, transpose=False) -> np.ndarray:
    """Solve ``M y = rhs`` (or ``M^T y = rhs``); ``rhs`` may hold several columns."""
    rhs = np.asarray(rhs, dtype=np.float64)
    if rhs.shape[0] != F.dimension:
        raise DimensionMismatch(
            f"rhs has {rhs.shape[0]} rows, factorization is {F.dimension}x{F.dimension}"
        )
    return sla.lu_solve((F.factors, F.pivots), rhs, trans=1 if transpose else 0,
                        check_finite=False)


def solve(M, rhs) -> np.ndarray:
    return lu_solve(lu_factor(M), rhs)


def singular_values(M) -> np.ndarray:
    """All singular values, descending."""
    M = as_matrix(M)
    if M.size == 0:
        raise DimensionMismatch("empty matrix")
    return sla.svdvals(M, check_finite=False)


def singular_extremes(M) -> tuple[float, float]:
    s = singular_values(M)
    return float(s[0]), float(s[-1])


def eigenvalues(M) -> Spectrum:
    """All eigenvalues of a real square matrix (Hessenberg + shifted QR)."""
    M = as_matrix(M, square=True)
    try:
        lam = np.linalg.eigvals(M)
    except np.linalg.LinAlgError as exc:
        raise ConvergenceFailure(str(exc)) from exc
    return Spectrum(np.asarray(lam, dtype=np.complex128))


def spectral_radius(M) -> float:
    return eigenvalues(M).spectral_radius


def matrix_rank(M, rtol=None) -> int:
    s = singular_values(M)
    if rtol is None:
        rtol = max(M.shape) * np.finfo(float).eps
    return int(np.sum(s > rtol * s[0])) if s[0] > 0 else 0
