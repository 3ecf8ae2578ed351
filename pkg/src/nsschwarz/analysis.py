"""A-norms, condition numbers, spectra and GMRES convergence diagnostics.

All induced norms use Euclidean coefficient norms, so the weak-coercivity
norm of ``v`` is ``||A v||_2`` and for any operator ``P``

    ||P||_A = sup ||A P v|| / ||A v|| = ||A P A^{-1}||_2.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DimensionMismatch, SingularMatrix, SingularOperator
from .linalg import (
    Spectrum,
    as_matrix,
    eigenvalues,
    lu_factor,
    lu_solve,
    singular_extremes,
    singular_values,
)


def a_norm(A, v) -> float:
    A = np.asarray(A, dtype=float)
    v = np.asarray(v, dtype=float)
    if A.shape[1] != v.shape[0]:
        raise DimensionMismatch(f"A is {A.shape}, v has length {v.shape[0]}")
    return float(np.linalg.norm(A @ v))


def similarity_transform(A, P, A_factors=None) -> np.ndarray:
    """``A P A^{-1}`` using a factorization of A (``X A^{-1} = (A^{-T} X^T)^T``)."""
    F = A_factors or lu_factor(A)
    X = np.asarray(A, dtype=float) @ np.asarray(P, dtype=float)
    return lu_solve(F, X.T, transpose=True).T


def operator_a_norm(A, P, A_factors=None) -> float:
    return singular_extremes(similarity_transform(A, P, A_factors))[0]


def _singular(smax, smin, n) -> bool:
    # an operator that is roundoff everywhere (e.g. E_mu of an exact solver) counts as singular
    return smin <= n * 1e-14 * max(smax, 1.0)


def _check_invertible(P):
    smax, smin = singular_extremes(P)
    n = P.shape[0]
    if smax == 0.0 or _singular(smax, smin, n):
        raise SingularOperator(f"operator is numerically singular "
                               f"(sigma_min/sigma_max = {smin / max(smax, 1e-300):.2e})")


def inverse_operator_a_norm(A, P, A_factors=None) -> float:
    """``||P^{-1}||_A = ||A P^{-1} A^{-1}||_2`` with P^{-1} applied by LU solves."""
    P = as_matrix(P, square=True)
    F = A_factors or lu_factor(A)
    try:
        FP = lu_factor(P)
    except SingularMatrix as exc:
        raise SingularOperator(str(exc)) from exc
    # A^{-1} as columns, then P^{-1} A^{-1}, then A (.)
    Ainv = lu_solve(F, np.eye(P.shape[0]))
    M = np.asarray(A, dtype=float) @ lu_solve(FP, Ainv)
    return singular_extremes(M)[0]


def condition_number_a(A, P, A_factors=None) -> float:
    """``kappa_A(P) = ||P||_A ||P^{-1}||_A``."""
    P = as_matrix(P, square=True)
    _check_invertible(P)
    F = A_factors or lu_factor(A)
    return operator_a_norm(A, P, F) * inverse_operator_a_norm(A, P, F)


def condition_number_2(M) -> float:
    smax, smin = singular_extremes(M)
    return smax / smin if smin > 0 else float("inf")


@dataclass(frozen=True)
class ElmanConstants:
    c_p: float
    C_p: float

    @property
    def indefinite(self) -> bool:
        return self.c_p <= 0.0

    @property
    def bound_factor(self) -> float | None:
        """Per-step GMRES contraction ``sqrt(1 - c_p^2 / C_p^2)``, or None if indefinite."""
        if self.indefinite:
            return None
        return float(np.sqrt(max(0.0, 1.0 - (self.c_p / self.C_p) ** 2)))

    def __iter__(self):
        return iter((self.c_p, self.C_p))


def elman_constants(M) -> ElmanConstants:
    """Smallest eigenvalue of the symmetric part and the 2-norm of ``M``."""
    M = as_matrix(M, square=True)
    c_p = float(np.linalg.eigvalsh(0.5 * (M + M.T))[0])
    return ElmanConstants(c_p, singular_extremes(M)[0])


def inf_sup_constants(A) -> tuple[float, float, float]:
    """``(gamma_a, beta_a, C_a)``: both inf-sup constants equal sigma_min(A)."""
    smax, smin = singular_extremes(A)
    return smin, smin, smax


@dataclass
class AnalysisReport:
    kind: str
    kappa_A: float
    op_norm_A: float
    inv_op_norm_A: float
    spectrum: Spectrum
    spectral_radius: float
    c_p: float
    C_p: float
    gamma_a: float
    beta_a: float
    C_a: float
    diameter: float
    E_mu_norm_A: float | None = None
    alpha: float | None = None

    @property
    def bound_factor(self):
        return ElmanConstants(self.c_p, self.C_p).bound_factor


def spectrum_report(ops, which="P_ad", j=None, with_E_mu=False) -> AnalysisReport:
    """Spectrum, rho, diameter, A-norm condition number and constants of one operator.

    ``kappa_A`` and the inverse norm are ``inf`` when the operator is
    singular (for instance ``E_mu`` with an exact global solver).
    """
    A = ops.A
    M = ops.operator(which, j).matrix
    F = lu_factor(A)
    S = similarity_transform(A, M, F)
    s = singular_values(S)
    op_norm = float(s[0])
    inv_norm = float("inf") if _singular(s[0], s[-1], M.shape[0]) else float(1.0 / s[-1])
    spec = eigenvalues(M)
    elman = elman_constants(M)
    g, bta, Ca = inf_sup_constants(A)
    E_norm = operator_a_norm(A, ops.E_mu, F) if with_E_mu or which == "E_mu" else None
    return AnalysisReport(
        kind=which,
        kappa_A=op_norm * inv_norm,
        op_norm_A=op_norm,
        inv_op_norm_A=inv_norm,
        spectrum=spec,
        spectral_radius=spec.spectral_radius,
        c_p=elman.c_p,
        C_p=elman.C_p,
        gamma_a=g,
        beta_a=bta,
        C_a=Ca,
        diameter=spec.diameter,
        E_mu_norm_A=E_norm,
        alpha=ops.alpha,
    )
