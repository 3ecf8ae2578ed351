"""Two-level nonoverlapping space decomposition for nested 1-D DG meshes.

Subspace 0 is the DG space of the same degree on the coarse mesh, embedded
into the fine space by exact polynomial re-expansion. Subspaces 1..J are the
fine DG functions supported on one subdomain, injected by zero extension.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from numpy.polynomial import legendre as npleg

from .dg import DGSpace, Mesh1D, build_mesh, legendre_table
from .errors import (
    DegreeMismatch,
    DimensionMismatch,
    IndexOutOfRange,
    NonNestedMeshes,
    SingularLocalMatrix,
    SingularMatrix,
)
from .linalg import LUFactors, lu_factor, matrix_rank


@dataclass(frozen=True)
class Partition:
    """``J`` contiguous subdomains made of whole coarse elements.

    ``element_ranges[j-1]`` is the half-open fine-element range of subdomain j.
    """

    J: int
    fine_m: int
    coarse_m: int
    element_ranges: tuple[tuple[int, int], ...]
    boundaries: tuple[int, ...]  # fine node indices of subdomain interfaces

    @property
    def fine_per_coarse(self) -> int:
        return self.fine_m // self.coarse_m


def build_partition(fine: Mesh1D, coarse_m: int, J: int) -> Partition:
    m = fine.m
    if J < 1 or coarse_m < 1:
        raise NonNestedMeshes(f"need J >= 1 and coarse_m >= 1, got J={J}, coarse_m={coarse_m}")
    if coarse_m % J:
        raise NonNestedMeshes(f"J={J} does not divide the coarse element count {coarse_m}")
    if m % coarse_m:
        raise NonNestedMeshes(f"coarse_m={coarse_m} does not divide the fine element count {m}")
    size = m // J
    ranges = tuple((j * size, (j + 1) * size) for j in range(J))
    return Partition(J, m, coarse_m, ranges, tuple(range(0, m + 1, size)))


def coarse_mesh_for(fine: Mesh1D, coarse_m: int) -> Mesh1D:
    if coarse_m < 1 or fine.m % coarse_m:
        raise NonNestedMeshes(f"coarse_m={coarse_m} does not divide {fine.m}")
    return build_mesh(coarse_m, fine.domain)


def coarse_prolongation(coarse: DGSpace, fine: DGSpace) -> np.ndarray:
    """Matrix re-expanding coarse modal coefficients in the fine modal basis.

    Both spaces use degree r, so each coarse polynomial restricted to a fine
    element is again in P_r and the re-expansion is exact.
    """
    if coarse.degree != fine.degree:
        raise DegreeMismatch(f"coarse degree {coarse.degree} != fine degree {fine.degree}")
    mc, mf = coarse.mesh.m, fine.mesh.m
    if mf % mc:
        raise NonNestedMeshes(f"{mc} coarse elements do not nest in {mf} fine elements")
    r = fine.degree
    ratio = mf // mc
    R0 = np.zeros((fine.ndofs, coarse.ndofs))
    xi, wq = npleg.leggauss(r + 1)
    Pf = legendre_table(r, xi)
    norms = (2 * np.arange(r + 1) + 1) / 2.0
    for kc in range(mc):
        for kf in range(kc * ratio, (kc + 1) * ratio):
            x = 0.5 * (fine.mesh.nodes[kf] + fine.mesh.nodes[kf + 1]) \
                + 0.5 * fine.mesh.widths[kf] * xi
            Pc = legendre_table(r, coarse.to_reference(kc, x))
            # column l: fine modal coefficients of coarse mode l
            block = (Pf * (wq * norms[:, None])) @ Pc.T
            R0[fine.dofs(kf), coarse.dofs(kc)] = block
    return R0


def subdomain_dofs(part: Partition, space: DGSpace, j: int) -> np.ndarray:
    if not 1 <= j <= part.J:
        raise IndexOutOfRange(f"subdomain index {j} not in 1..{part.J}")
    lo, hi = part.element_ranges[j - 1]
    return np.arange(lo * space.nloc, hi * space.nloc)


def subdomain_prolongation(part: Partition, space: DGSpace, j: int) -> np.ndarray:
    """Zero-extension injection of the dofs owned by subdomain ``j`` (1-based)."""
    idx = subdomain_dofs(part, space, j)
    R = np.zeros((space.ndofs, len(idx)))
    R[idx, np.arange(len(idx))] = 1.0
    return R


@dataclass(frozen=True)
class Decomposition:
    """Prolongations ``R_j`` (n x n_j), local matrices and their LU factors.

    Index 0 is the coarse space when one is present. ``test_prolongations``
    holds the S_j family; it defaults to the same matrices as R_j.
    """

    prolongations: tuple[np.ndarray, ...]
    local_matrices: tuple[np.ndarray, ...]
    factors: tuple[LUFactors, ...]
    test_prolongations: tuple[np.ndarray, ...] = None
    coarse_space: DGSpace | None = None
    partition: Partition | None = None
    A: np.ndarray | None = field(default=None, repr=False)

    def __post_init__(self):
        if self.test_prolongations is None:
            object.__setattr__(self, "test_prolongations", self.prolongations)

    def __len__(self):
        return len(self.prolongations)

    @property
    def n(self) -> int:
        return self.prolongations[0].shape[0]

    @property
    def sizes(self) -> list[int]:
        return [R.shape[1] for R in self.prolongations]


def build_local_solvers(A, prolongations, test_prolongations=None,
                        local_overrides=None, **extra) -> Decomposition:
    """Form and factor ``A_j = S_j^T A R_j`` for every subspace.

    ``local_overrides`` maps j to a user-supplied local matrix (inexact
    local solver). Raises SingularLocalMatrix naming the offending j.
    """
    A = np.asarray(A, dtype=float)
    n = A.shape[0]
    R = tuple(np.asarray(Rj, dtype=float) for Rj in prolongations)
    S = R if test_prolongations is None else tuple(np.asarray(Sj, dtype=float)
                                                  for Sj in test_prolongations)
    if len(S) != len(R):
        raise DimensionMismatch("R and S families differ in length")
    local, factors = [], []
    for j, (Rj, Sj) in enumerate(zip(R, S)):
        if Rj.shape[0] != n or Sj.shape != Rj.shape:
            raise DimensionMismatch(f"prolongation {j} has shape {Rj.shape}, n = {n}")
        if local_overrides and j in local_overrides:
            Aj = np.asarray(local_overrides[j], dtype=float)
        else:
            Aj = Sj.T @ A @ Rj
        try:
            Fj = lu_factor(Aj)
        except SingularMatrix as exc:
            raise SingularLocalMatrix(j) from exc
        local.append(Aj)
        factors.append(Fj)
    return Decomposition(R, tuple(local), tuple(factors),
                         None if test_prolongations is None else S, A=A, **extra)


def two_level(A, space: DGSpace, coarse_m: int, J: int, coarse=True) -> Decomposition:
    """Coarse space on ``coarse_m`` elements plus ``J`` subdomain injections."""
    part = build_partition(space.mesh, coarse_m, J)
    prol = [subdomain_prolongation(part, space, j) for j in range(1, J + 1)]
    cspace = None
    if coarse:
        cspace = DGSpace(coarse_mesh_for(space.mesh, coarse_m), space.degree)
        prol.insert(0, coarse_prolongation(cspace, space))
    return build_local_solvers(A, prol, coarse_space=cspace, partition=part)


@dataclass
class DecompositionReport:
    n: int
    concatenated_rank: int
    column_ranks: list[int]
    sizes: list[int]
    reconstruction_residuals: list[float]
    redundancy: int
    proper: list[bool]
    passed: bool

    def __str__(self):
        status = "PASS" if self.passed else "FAIL"
        return (f"{status}: rank {self.concatenated_rank}/{self.n}, "
                f"redundancy {self.redundancy}, "
                f"max A_j residual {max(self.reconstruction_residuals):.2e}")


def verify_decomposition(dec: Decomposition, tol=1e-13) -> DecompositionReport:
    """Check the rank, proper-subspace and exact-local-solver invariants."""
    n = dec.n
    stacked = np.hstack(dec.prolongations)
    rank = matrix_rank(stacked)
    col_ranks = [matrix_rank(R) for R in dec.prolongations]
    residuals = []
    for Rj, Sj, Aj in zip(dec.prolongations, dec.test_prolongations, dec.local_matrices):
        if dec.A is None:
            residuals.append(0.0)
            continue
        ref = Sj.T @ dec.A @ Rj
        scale = max(np.linalg.norm(ref), np.finfo(float).tiny)
        residuals.append(float(np.linalg.norm(Aj - ref) / scale))
    proper = [Rj.shape[1] < n for Rj in dec.prolongations]
    ok = (rank == n
          and all(c == R.shape[1] for c, R in zip(col_ranks, dec.prolongations))
          and all(res <= tol for res in residuals)
          and all(proper))
    return DecompositionReport(n, rank, col_ranks, dec.sizes, residuals,
                               int(sum(dec.sizes) - rank), proper, ok)
