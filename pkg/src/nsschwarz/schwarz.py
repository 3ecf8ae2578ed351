"""Additive, multiplicative and hybrid Schwarz operators.

With exact local solvers ``A_j = S_j^T A R_j`` the projection-like operators
are

    P_j = R_j A_j^{-1} S_j^T A,        Q_j = S_j A_j^{-T} R_j^T A^T,

and every Schwarz operator is a sum or product of them. Each operator is
available both as an explicit n x n matrix (for analysis) and as a
matrix-free action built from local solves (for the iterative solvers).
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property

import numpy as np

from .decomposition import Decomposition
from .errors import ConfigError, DimensionMismatch, IndexOutOfRange
from .linalg import lu_solve

KINDS = ("A", "P_j", "Q_j", "P_ad", "Q_ad", "B", "B_adj", "E_mu", "E_sy",
         "P_mu", "P_sy", "P_hy", "B_hy", "E_hy", "Q_hy", "G_hy")


@dataclass(frozen=True)
class OperatorMatrix:
    kind: str
    matrix: np.ndarray


class SchwarzOperators:
    """Schwarz operators of one global matrix and one decomposition.

    Parameters
    ----------
    A : (n, n) array
        Global stiffness matrix.
    dec : Decomposition
        Prolongations and factored local matrices; index 0 is the coarse
        space for the hybrid operators.
    alpha : float
        Hybrid relaxation parameter. ``alpha = 0`` is accepted for testing.
    """

    def __init__(self, A, dec: Decomposition, alpha=1.0):
        A = np.asarray(A, dtype=float)
        if A.shape != (dec.n, dec.n):
            raise DimensionMismatch(f"A is {A.shape}, decomposition has n = {dec.n}")
        if alpha < 0:
            raise ConfigError(f"alpha must be nonnegative, got {alpha}")
        self.A = A
        self.dec = dec
        self.alpha = float(alpha)
        self.R = dec.prolongations
        self.S = dec.test_prolongations
        self.n = dec.n

    @property
    def J(self) -> int:
        """Index of the last subspace (subspaces are numbered 0..J)."""
        return len(self.R) - 1

    def _check(self, j):
        if not 0 <= j <= self.J:
            raise IndexOutOfRange(f"subspace index {j} not in 0..{self.J}")

    # -- local pieces ------------------------------------------------------

    def local_correction(self, j, r) -> np.ndarray:
        """``R_j A_j^{-1} S_j^T r``; ``r`` may be a vector or a block of columns."""
        return self.R[j] @ lu_solve(self.dec.factors[j], self.S[j].T @ r)

    def local_adjoint_correction(self, j, r) -> np.ndarray:
        """``S_j A_j^{-T} R_j^T r``."""
        return self.S[j] @ lu_solve(self.dec.factors[j], self.R[j].T @ r, transpose=True)

    @cached_property
    def _SA(self) -> list[np.ndarray]:
        """``S_j^T A`` for every j (n_j x n)."""
        return [self.S[j].T @ self.A for j in range(self.J + 1)]

    @cached_property
    def _RAt(self) -> list[np.ndarray]:
        """``R_j^T A^T`` for every j."""
        return [self.R[j].T @ self.A.T for j in range(self.J + 1)]

    def apply_P_j(self, j, X) -> np.ndarray:
        """``P_j X`` without forming P_j."""
        return self.R[j] @ lu_solve(self.dec.factors[j], self._SA[j] @ X)

    def _P_matrix(self, j) -> np.ndarray:
        return self.R[j] @ lu_solve(self.dec.factors[j], self._SA[j])

    def _Q_matrix(self, j) -> np.ndarray:
        return self.S[j] @ lu_solve(self.dec.factors[j], self._RAt[j], transpose=True)

    def projection_matrices(self, j) -> tuple[np.ndarray, np.ndarray]:
        """``(P_j, Q_j)`` from multi-rhs local solves (A_j is never inverted)."""
        self._check(j)
        return self._P_matrix(j), self._Q_matrix(j)

    def _local_inverse(self, j) -> np.ndarray:
        """``R_j A_j^{-1} S_j^T`` as a matrix."""
        return self.R[j] @ lu_solve(self.dec.factors[j], self.S[j].T)

    def _local_inverse_adjoint(self, j) -> np.ndarray:
        return self.S[j] @ lu_solve(self.dec.factors[j], self.R[j].T, transpose=True)

    # -- additive ----------------------------------------------------------

    @cached_property
    def additive(self) -> tuple[np.ndarray, np.ndarray, np.ndarray, np.ndarray]:
        P_ad = np.zeros((self.n, self.n))
        Q_ad = np.zeros((self.n, self.n))
        B = np.zeros((self.n, self.n))
        B_adj = np.zeros((self.n, self.n))
        for j in range(self.J + 1):
            P_ad += self._P_matrix(j)
            Q_ad += self._Q_matrix(j)
            B += self._local_inverse(j)
            B_adj += self._local_inverse_adjoint(j)
        return P_ad, Q_ad, B, B_adj

    def additive_operators(self):
        """``(P_ad, Q_ad, B, B_adj)``."""
        return self.additive

    def apply_B(self, r) -> np.ndarray:
        out = np.zeros_like(np.asarray(r, dtype=float))
        for j in range(self.J + 1):
            out += self.local_correction(j, r)
        return out

    def apply_P_ad(self, v) -> np.ndarray:
        return self.apply_B(self.A @ v)

    # -- multiplicative ----------------------------------------------------

    def _order(self, symmetrized):
        up = list(range(self.J + 1))
        return up + up[::-1] if symmetrized else up

    def multiplicative_operators(self, symmetrized=False) -> tuple[np.ndarray, np.ndarray]:
        """``(E, I - E)`` with ``E = (I-P_J)...(I-P_0)``, or its symmetrized form."""
        I = np.eye(self.n)
        E = I.copy()
        for j in self._order(symmetrized):
            E = E - self.apply_P_j(j, E)
        return E, I - E

    @cached_property
    def E_mu(self) -> np.ndarray:
        return self.multiplicative_operators(False)[0]

    def multiplicative_sweep(self, u, f, symmetrized=False) -> np.ndarray:
        """One sweep of successive subspace corrections starting from ``u``."""
        u = np.array(u, dtype=float)
        f = np.asarray(f, dtype=float)
        if u.shape != (self.n,) or f.shape != (self.n,):
            raise DimensionMismatch("u and f must have length n")
        for j in self._order(symmetrized):
            u += self.local_correction(j, f - self.A @ u)
        return u

    # -- hybrid ------------------------------------------------------------

    def _require_hybrid(self):
        if self.J < 1:
            raise ConfigError("hybrid operators need a coarse space and at least one subdomain")

    @cached_property
    def hybrid(self) -> tuple[np.ndarray, np.ndarray]:
        self._require_hybrid()
        a = self.alpha
        I = np.eye(self.n)
        B_hat = sum(self._local_inverse(j) for j in range(1, self.J + 1))
        P_hat = self._sum_P(1)
        P0 = self._P_matrix(0)
        P_hy = a * P0 + (I - a * P0) @ P_hat
        B_hy = a * self._local_inverse(0) + (I - a * P0) @ B_hat
        return P_hy, B_hy

    def hybrid_operators(self):
        """``(P_hy, B_hy)`` with ``B_hy A = P_hy``."""
        return self.hybrid

    def hybrid_error_operator(self) -> np.ndarray:
        self._require_hybrid()
        I = np.eye(self.n)
        P_hat = self._sum_P(1)
        return (I - self.alpha * self._P_matrix(0)) @ (I - P_hat)

    def _sum_P(self, start) -> np.ndarray:
        out = np.zeros((self.n, self.n))
        for j in range(start, self.J + 1):
            out += self._P_matrix(j)
        return out

    def apply_B_hy(self, r) -> np.ndarray:
        self._require_hybrid()
        y = np.zeros_like(np.asarray(r, dtype=float))
        for j in range(1, self.J + 1):
            y += self.local_correction(j, r)
        y -= self.alpha * self.local_correction(0, self.A @ y)
        return y + self.alpha * self.local_correction(0, r)

    def apply_P_hy(self, v) -> np.ndarray:
        return self.apply_B_hy(self.A @ v)

    def q_side_operators(self) -> tuple[np.ndarray, np.ndarray]:
        """``(Q_hy, G_hy)`` with ``G_hy = (I - alpha Q_0)(I - Q_hat)``."""
        self._require_hybrid()
        a = self.alpha
        I = np.eye(self.n)
        Q_hat = np.zeros((self.n, self.n))
        for j in range(1, self.J + 1):
            Q_hat += self._Q_matrix(j)
        Q0 = self._Q_matrix(0)
        G_hy = (I - a * Q0) @ (I - Q_hat)
        Q_hy = a * Q0 + (I - a * Q0) @ Q_hat
        return Q_hy, G_hy

    # -- lookup --------------------------------------------------------------

    def operator(self, kind: str, j: int | None = None) -> OperatorMatrix:
        """Explicit matrix of the named operator (see ``KINDS``)."""
        if kind == "A":
            M = self.A
        elif kind in ("P_j", "Q_j"):
            if j is None:
                raise ConfigError(f"{kind} needs a subspace index")
            M = self.projection_matrices(j)[0 if kind == "P_j" else 1]
        elif kind in ("P_ad", "Q_ad", "B", "B_adj"):
            M = self.additive[("P_ad", "Q_ad", "B", "B_adj").index(kind)]
        elif kind in ("E_mu", "P_mu"):
            M = self.multiplicative_operators(False)[kind == "P_mu"]
        elif kind in ("E_sy", "P_sy"):
            M = self.multiplicative_operators(True)[kind == "P_sy"]
        elif kind in ("P_hy", "B_hy"):
            M = self.hybrid[kind == "B_hy"]
        elif kind == "E_hy":
            M = self.hybrid_error_operator()
        elif kind in ("Q_hy", "G_hy"):
            M = self.q_side_operators()[kind == "G_hy"]
        else:
            raise ConfigError(f"unknown operator kind {kind!r}; known: {KINDS}")
        return OperatorMatrix(kind, M)

    def action(self, kind: str):
        """Matrix-free action ``v -> M v`` for the solver path."""
        actions = {
            "A": lambda v: self.A @ v,
            "B": self.apply_B,
            "P_ad": self.apply_P_ad,
            "B_hy": self.apply_B_hy,
            "P_hy": self.apply_P_hy,
            # with f = 0 the exact solution is 0, so one sweep maps e to E e
            "E_mu": lambda e: self.multiplicative_sweep(e, np.zeros(self.n)),
            "E_sy": lambda e: self.multiplicative_sweep(e, np.zeros(self.n), True),
        }
        if kind not in actions:
            raise ConfigError(f"no matrix-free action for {kind!r}")
        return actions[kind]
