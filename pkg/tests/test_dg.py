import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from numpy.polynomial import Legendre
from scipy.integrate import quad

from nsschwarz.dg import (
    DGSpace,
    ProblemConfig,
    assemble,
    assemble_load,
    assemble_stiffness,
    build_mesh,
    error_norms,
    evaluate,
    manufactured,
)
from nsschwarz.errors import ConfigError, InvalidElementCount, OutOfDomain
from oracles import oracle_stiffness

ZERO = lambda x: 0.0 * np.asarray(x, dtype=float)  # noqa: E731  (epsilon = 0 needs a callable)


def test_build_mesh_examples():
    np.testing.assert_array_equal(build_mesh(4).nodes, [0, 0.25, 0.5, 0.75, 1])
    np.testing.assert_array_equal(build_mesh(1).nodes, [0, 1])
    mesh = build_mesh(256)
    assert len(mesh.nodes) == 257
    np.testing.assert_array_max_ulp(mesh.nodes, np.arange(257) / 256, maxulp=1)
    assert mesh.nodes[0] == 0.0 and mesh.nodes[-1] == 1.0


def test_build_mesh_rejects_zero():
    with pytest.raises(InvalidElementCount):
        build_mesh(0)


def test_problem_config_invariants():
    with pytest.raises(ConfigError):
        ProblemConfig(epsilon=0.0)
    with pytest.raises(ConfigError):
        ProblemConfig(penalty_ce=-1.0)
    with pytest.raises(ConfigError):
        ProblemConfig(degree_r=0)
    assert ProblemConfig(degree_r=2).penalty_ce == 90.0


def test_single_element_mass_matrix():
    cfg = ProblemConfig(epsilon=ZERO, b=0.0, gamma=1.0, degree_r=1)
    A = assemble_stiffness(DGSpace(build_mesh(1), 1), cfg)
    np.testing.assert_allclose(A, np.diag([1.0, 1.0 / 3.0]), atol=1e-15)


@pytest.mark.parametrize("m,r,eps,b,gamma", [
    (2, 1, 1.0, 0.0, 0.0),
    (3, 2, 0.3, 1.5, 0.7),
    (4, 1, 1e-2, -2.0, 1.0),
    (2, 3, 1.0, 1.0, 1.0),
])
def test_stiffness_matches_term_by_term_oracle(m, r, eps, b, gamma):
    ce = 10.0 * (r + 1) ** 2
    cfg = ProblemConfig(epsilon=eps, b=b, gamma=gamma, degree_r=r, penalty_ce=ce)
    A = assemble_stiffness(DGSpace(build_mesh(m), r), cfg)
    oracle = oracle_stiffness(m, r, eps, b, gamma, ce)
    np.testing.assert_allclose(A, oracle, rtol=0, atol=1e-12 * np.max(np.abs(oracle)))


def test_pure_transport_is_upwind_finite_volume(rng):
    b, m = 2.0, 6
    cfg = ProblemConfig(epsilon=ZERO, b=b, gamma=0.0, degree_r=1)
    space = DGSpace(build_mesh(m), 1)
    A = assemble_stiffness(space, cfg)
    u = rng.standard_normal(space.ndofs)
    right_traces = np.array([evaluate(space, u, space.mesh.nodes[k + 1]) for k in range(m)])
    inflow = np.concatenate([[0.0], right_traces[:-1]])
    # the constant-mode row of element K is the upwind flux difference over K
    np.testing.assert_allclose((A @ u)[0::2], b * (right_traces - inflow), atol=1e-13)
    # a global constant satisfies every element equation except the inflow one
    const = np.zeros(space.ndofs)
    const[0::2] = 3.0
    res = A @ const
    np.testing.assert_allclose(res[2:], 0.0, atol=1e-13)
    assert abs(res[0]) > 0


def test_load_examples():
    space = DGSpace(build_mesh(2), 1)
    np.testing.assert_array_equal(assemble_load(space, lambda x: 0.0 * x), 0.0)
    np.testing.assert_allclose(assemble_load(space, lambda x: np.ones_like(x)),
                               [0.5, 0.0, 0.5, 0.0], atol=1e-15)


def test_load_matches_adaptive_quadrature():
    space = DGSpace(build_mesh(5), 2)
    f = assemble_load(space, lambda x: np.sin(np.pi * x))
    oracle = []
    for k in range(5):
        xa, xb = space.mesh.nodes[k], space.mesh.nodes[k + 1]
        for p in range(3):
            c = np.zeros(3)
            c[p] = 1.0
            phi = Legendre(c, domain=[xa, xb])
            oracle.append(quad(lambda x: math.sin(math.pi * x) * phi(x), xa, xb, epsabs=1e-14)[0])
    np.testing.assert_allclose(f, oracle, atol=1e-10)


def test_evaluate_examples():
    space1 = DGSpace(build_mesh(1), 1)
    space = DGSpace(build_mesh(3), 2)
    assert evaluate(space, np.zeros(space.ndofs), 0.4) == 0.0
    assert evaluate(space1, [2.5, 0.0], 0.77) == pytest.approx(2.5)
    assert evaluate(space1, [0.0, 1.0], 1.0) == pytest.approx(1.0)
    assert evaluate(space1, [0.0, 1.0], 0.0) == pytest.approx(-1.0)


def test_evaluate_boundary_convention():
    space = DGSpace(build_mesh(2), 1)
    c = np.array([1.0, 0.0, 5.0, 0.0])
    assert evaluate(space, c, 0.5) == 1.0   # left element owns the interface
    assert evaluate(space, c, 0.0) == 1.0
    assert evaluate(space, c, 1.0) == 5.0
    with pytest.raises(OutOfDomain):
        evaluate(space, c, 1.5)


def _interpolate(space, fun):
    """L2 projection element by element (exact for polynomials of degree <= r)."""
    r = space.degree
    c = np.zeros(space.ndofs)
    for k in range(space.mesh.m):
        xa, xb = space.mesh.nodes[k], space.mesh.nodes[k + 1]
        for p in range(r + 1):
            e = np.zeros(r + 1)
            e[p] = 1.0
            phi = Legendre(e, domain=[xa, xb])
            c[k * (r + 1) + p] = quad(lambda x: fun(x) * phi(x), xa, xb)[0] * (2 * p + 1) / (xb - xa)
    return c


def test_error_norms_examples():
    space = DGSpace(build_mesh(4), 2)
    u = lambda x: x * (1 - x)  # noqa: E731
    du = lambda x: 1 - 2 * x  # noqa: E731
    l2, h1 = error_norms(space, _interpolate(space, u), u, du)
    assert l2 <= 1e-12 and h1 <= 1e-12
    l2, _ = error_norms(space, np.zeros(space.ndofs), lambda x: np.sin(np.pi * x),
                        lambda x: np.pi * np.cos(np.pi * x))
    assert l2 == pytest.approx(1 / math.sqrt(2), abs=1e-8)


def test_refinement_reduces_l2():
    cfg = ProblemConfig(epsilon=1.0, b=1.0, gamma=1.0, source="sin")
    ms = manufactured("sin", cfg)
    errs = []
    for m in (4, 8, 16, 32):
        s = assemble(cfg, m)
        errs.append(error_norms(s.space, np.linalg.solve(s.A, s.f), ms.exact, ms.exact_deriv)[0])
    assert all(e2 < e1 for e1, e2 in zip(errs, errs[1:]))


@pytest.mark.parametrize("variant,r,l2_rate", [
    ("incomplete", 1, 2), ("incomplete", 3, 4), ("symmetric", 2, 3),
    # one-sided consistency loses an L2 order for even degrees
    ("incomplete", 2, 2),
])
def test_convergence_rates(variant, r, l2_rate):
    cfg = ProblemConfig(epsilon=1.0, b=1.0, gamma=1.0, source="sin", degree_r=r, ip_variant=variant)
    ms = manufactured("sin", cfg)
    errs = []
    for m in (16, 32, 64):
        s = assemble(cfg, m)
        errs.append(error_norms(s.space, np.linalg.solve(s.A, s.f), ms.exact, ms.exact_deriv))
    l2 = np.log2(errs[1][0] / errs[2][0])
    h1 = np.log2(errs[1][1] / errs[2][1])
    assert h1 == pytest.approx(r, abs=0.15)
    assert l2 == pytest.approx(l2_rate, abs=0.25)


@pytest.mark.parametrize("name", ["sin", "poly", "boundary-layer"])
def test_manufactured_sources_are_consistent(name):
    # -eps u'' + b u' + gamma u = f, checked with finite differences of u'
    cfg = ProblemConfig(epsilon=0.5, b=2.0, gamma=1.5)
    ms = manufactured(name, cfg)
    x = np.linspace(0.1, 0.9, 9)
    d = 1e-5
    u2 = (ms.exact_deriv(x + d) - ms.exact_deriv(x - d)) / (2 * d)
    lhs = -0.5 * u2 + 2.0 * ms.exact_deriv(x) + 1.5 * ms.exact(x)
    np.testing.assert_allclose(lhs, ms.source(x), rtol=1e-6, atol=1e-6)
    np.testing.assert_allclose([ms.exact(0.0), ms.exact(1.0)], 0.0, atol=1e-14)


def test_boundary_layer_is_overflow_safe():
    ms = manufactured("boundary-layer", ProblemConfig(epsilon=1.0, b=1e5))
    vals = ms.exact(np.linspace(0, 1, 11))
    assert np.all(np.isfinite(vals))


def test_element_mass_is_diagonal():
    for r in (1, 2, 3):
        cfg = ProblemConfig(epsilon=ZERO, b=0.0, gamma=1.0, degree_r=r)
        A = assemble_stiffness(DGSpace(build_mesh(3), r), cfg)
        h = 1 / 3
        expected = np.kron(np.eye(3), np.diag([h / (2 * p + 1) for p in range(r + 1)]))
        np.testing.assert_allclose(A, expected, atol=1e-15)


def test_penalty_enters_linearly():
    base = ProblemConfig(epsilon=0.7, b=1.3, gamma=0.4, degree_r=2)
    space = DGSpace(build_mesh(5), 2)
    A1 = assemble_stiffness(space, base.with_(penalty_ce=10.0))
    A2 = assemble_stiffness(space, base.with_(penalty_ce=20.0))
    A3 = assemble_stiffness(space, base.with_(penalty_ce=30.0))
    np.testing.assert_allclose(A3 - A2, A2 - A1, atol=1e-12)
    oracle = oracle_stiffness(5, 2, 0.7, 0.0, 0.0, 10.0) - oracle_stiffness(5, 2, 0.7, 0.0, 0.0, 0.0)
    np.testing.assert_allclose(A2 - A1, oracle, atol=1e-10)


def test_boundary_only_penalty_drops_interior_terms():
    cfg = ProblemConfig(epsilon=1.0, b=0.0, gamma=1.0, degree_r=1)
    space = DGSpace(build_mesh(2), 1)
    full = assemble_stiffness(space, cfg)
    lit = assemble_stiffness(space, cfg.with_(boundary_only_penalty=True))
    # with b = 0 and no interior edge terms, the elements decouple
    np.testing.assert_array_equal(lit[:2, 2:], 0.0)
    assert np.any(full[:2, 2:] != 0.0)


def test_symmetric_variant_gives_symmetric_matrix():
    cfg = ProblemConfig(epsilon=1.0, b=0.0, gamma=1.0, ip_variant="symmetric")
    A = assemble_stiffness(DGSpace(build_mesh(6), 1), cfg)
    np.testing.assert_allclose(A, A.T, atol=1e-12)


@settings(max_examples=25, deadline=None)
@given(m=st.integers(1, 64), r=st.integers(1, 3),
       eps=st.floats(1e-3, 10.0), gamma=st.floats(0.0, 10.0))
def test_symmetric_part_positive_definite(m, r, eps, gamma):
    cfg = ProblemConfig(epsilon=eps, b=0.0, gamma=gamma, degree_r=r)
    A = assemble_stiffness(DGSpace(build_mesh(m), r), cfg)
    assert np.linalg.eigvalsh(0.5 * (A + A.T))[0] > 0


def test_discrete_residual_after_direct_solve():
    s = assemble(ProblemConfig(epsilon=1.0, b=1.0, gamma=1.0, source="sin"), 128)
    u = np.linalg.solve(s.A, s.f)
    assert np.linalg.norm(s.A @ u - s.f) <= 1e-10
    assert s.A.shape == (s.n, s.n) and s.f.shape == (s.n,)
