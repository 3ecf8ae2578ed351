import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from numpy.polynomial import Legendre

from nsschwarz import experiments as ex
from nsschwarz.decomposition import (
    build_local_solvers,
    build_partition,
    coarse_prolongation,
    subdomain_dofs,
    subdomain_prolongation,
    two_level,
    verify_decomposition,
)
from nsschwarz.dg import DGSpace, ProblemConfig, assemble, build_mesh, evaluate
from nsschwarz.errors import DegreeMismatch, IndexOutOfRange, NonNestedMeshes, SingularLocalMatrix
from oracles import oracle_stiffness


def test_partition_full_scale_sizes():
    part = build_partition(build_mesh(256), 64, 4)
    assert part.J == 4
    for lo, hi in part.element_ranges:
        assert hi - lo == 64
        assert (hi - lo) // part.fine_per_coarse == 16


def test_partition_one_coarse_element_each():
    part = build_partition(build_mesh(4), 4, 4)
    assert part.element_ranges == ((0, 1), (1, 2), (2, 3), (3, 4))


def test_partition_non_nested():
    with pytest.raises(NonNestedMeshes):
        build_partition(build_mesh(8), 4, 3)
    with pytest.raises(NonNestedMeshes):
        build_partition(build_mesh(12), 8, 4)


@given(k=st.integers(0, 5), a=st.integers(0, 4), b=st.integers(0, 3))
def test_partition_disjoint_cover(k, a, b):
    J = 2**k
    coarse_m = J * 2**a
    m = coarse_m * 2**b
    part = build_partition(build_mesh(m), coarse_m, J)
    covered = np.concatenate([np.arange(lo, hi) for lo, hi in part.element_ranges])
    np.testing.assert_array_equal(covered, np.arange(m))
    for lo, hi in part.element_ranges:
        assert lo % part.fine_per_coarse == 0 and hi % part.fine_per_coarse == 0


def test_coarse_prolongation_same_mesh_is_identity():
    space = DGSpace(build_mesh(6), 2)
    np.testing.assert_allclose(coarse_prolongation(space, space), np.eye(space.ndofs), atol=1e-14)


def test_coarse_constant_embeds_as_constants():
    R0 = coarse_prolongation(DGSpace(build_mesh(1), 1), DGSpace(build_mesh(2), 1))
    np.testing.assert_allclose(R0[:, 0], [1.0, 0.0, 1.0, 0.0], atol=1e-15)


def test_coarse_linear_mode_vs_least_squares_projection():
    r = 2
    coarse, fine = DGSpace(build_mesh(2), r), DGSpace(build_mesh(8), r)
    R0 = coarse_prolongation(coarse, fine)
    for col in range(coarse.ndofs):
        kc, p = divmod(col, r + 1)
        e = np.zeros(r + 1)
        e[p] = 1.0
        g = Legendre(e, domain=coarse.mesh.nodes[kc:kc + 2])
        for kf in range(fine.mesh.m):
            xa, xb = fine.mesh.nodes[kf], fine.mesh.nodes[kf + 1]
            inside = coarse.mesh.nodes[kc] <= xa and xb <= coarse.mesh.nodes[kc + 1]
            x = np.linspace(xa, xb, 12)
            target = g(x) if inside else np.zeros_like(x)
            V = np.array([Legendre(np.eye(r + 1)[q], domain=[xa, xb])(x) for q in range(r + 1)]).T
            coef = np.linalg.lstsq(V, target, rcond=None)[0]
            np.testing.assert_allclose(R0[fine.dofs(kf), col], coef, atol=1e-12)


def test_coarse_prolongation_degree_mismatch():
    with pytest.raises(DegreeMismatch):
        coarse_prolongation(DGSpace(build_mesh(2), 1), DGSpace(build_mesh(4), 2))


@settings(max_examples=20, deadline=None)
@given(r=st.integers(1, 3), seed=st.integers(0, 2**31 - 1))
def test_coarse_embedding_is_pointwise_exact(r, seed):
    rng = np.random.default_rng(seed)
    coarse, fine = DGSpace(build_mesh(4), r), DGSpace(build_mesh(16), r)
    c = rng.standard_normal(coarse.ndofs)
    u = coarse_prolongation(coarse, fine) @ c
    for x in rng.uniform(0, 1, 20):
        assert evaluate(fine, u, x) == pytest.approx(evaluate(coarse, c, x), abs=1e-12)


def test_subdomain_prolongation_examples():
    space = DGSpace(build_mesh(4), 1)
    R = subdomain_prolongation(build_partition(space.mesh, 1, 1), space, 1)
    np.testing.assert_array_equal(R, np.eye(8))
    part = build_partition(space.mesh, 2, 2)
    R1 = subdomain_prolongation(part, space, 1)
    assert R1.shape == (8, 4)
    np.testing.assert_array_equal(R1[:4], np.eye(4))
    np.testing.assert_array_equal(R1[4:], 0.0)
    for j in (1, 2):
        Rj = subdomain_prolongation(part, space, j)
        np.testing.assert_array_equal(Rj.T @ Rj, np.eye(4))
    with pytest.raises(IndexOutOfRange):
        subdomain_prolongation(part, space, 0)
    with pytest.raises(IndexOutOfRange):
        subdomain_prolongation(part, space, 3)


def test_local_solvers_identity_matrix():
    space = DGSpace(build_mesh(8), 1)
    A = np.eye(space.ndofs)
    dec = two_level(A, space, 4, 2)
    R0 = dec.prolongations[0]
    np.testing.assert_allclose(dec.local_matrices[0], R0.T @ R0)
    for Aj in dec.local_matrices[1:]:
        np.testing.assert_array_equal(Aj, np.eye(Aj.shape[0]))


def test_test1_local_matrices_invertible():
    s = assemble(ex.test_problem("test1"), 64)
    dec = two_level(s.A, s.space, 16, 4)
    assert len(dec.factors) == 5
    assert verify_decomposition(dec).passed


def test_local_matrices_match_restricted_assembly():
    m, r, J = 8, 1, 2
    eps, b, gamma = 0.5, 3.0, 1.0
    ce = 40.0
    cfg = ProblemConfig(epsilon=eps, b=b, gamma=gamma, degree_r=r, penalty_ce=ce)
    s = assemble(cfg, m)
    dec = two_level(s.A, s.space, 4, J)
    for j in range(1, J + 1):
        idx = subdomain_dofs(dec.partition, s.space, j)
        oracle = oracle_stiffness(m, r, eps, b, gamma, ce, indices=idx)
        np.testing.assert_allclose(dec.local_matrices[j], oracle, atol=1e-12 * np.abs(oracle).max())


def test_singular_local_matrix_reports_index():
    A = np.eye(4)
    A[3, 3] = 0.0
    R = [np.eye(4)[:, :2], np.eye(4)[:, 2:]]
    with pytest.raises(SingularLocalMatrix) as info:
        build_local_solvers(A, R)
    assert info.value.j == 1


def test_verify_without_coarse_space_and_with_duplicate():
    s = assemble(ex.test_problem("test2"), 32)
    full = two_level(s.A, s.space, 8, 4)
    rep = verify_decomposition(full)
    assert rep.passed and rep.redundancy == full.sizes[0]

    sub = two_level(s.A, s.space, 8, 4, coarse=False)
    rep = verify_decomposition(sub)
    assert rep.concatenated_rank == s.n and rep.redundancy == 0 and rep.passed

    dup = build_local_solvers(s.A, full.prolongations + (full.prolongations[2],))
    rep2 = verify_decomposition(dup)
    assert rep2.concatenated_rank == s.n
    assert rep2.redundancy == verify_decomposition(full).redundancy + full.sizes[2]


def test_partition_of_unity_and_transpose_pattern():
    s = assemble(ex.test_problem("test3"), 32)
    dec = two_level(s.A, s.space, 8, 4)
    total = sum(R @ R.T for R in dec.prolongations[1:])
    np.testing.assert_array_equal(total, np.eye(s.n))
    decT = build_local_solvers(s.A.T, dec.prolongations)
    for Aj, AjT in zip(dec.local_matrices, decT.local_matrices):
        np.testing.assert_allclose(AjT, Aj.T, atol=1e-13 * np.abs(Aj).max())


def test_inexact_local_override():
    s = assemble(ex.test_problem("test1"), 16)
    dec = two_level(s.A, s.space, 4, 2)
    D = np.diag(np.diag(dec.local_matrices[1]))
    dec2 = build_local_solvers(s.A, dec.prolongations, local_overrides={1: D})
    np.testing.assert_array_equal(dec2.local_matrices[1], D)
    assert not verify_decomposition(dec2).passed
