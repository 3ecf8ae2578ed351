"""Interior-penalty DG discretization of 1-D convection-diffusion-reaction.

Solves ``-(eps u')' + (b u)' + gamma u = f`` on an interval with homogeneous
Dirichlet data. The bilinear form is

    a(u, w) = sum_K int_K (gamma u w + (eps u' - b u) w') dx
            + sum_e c_e eps/|e| [u][w]
            + sum_{interior e} {b u}_upw [w]
            - sum_e {eps u'}[w]
            + sum_{outflow e} (b n) u w

with jumps ``[v] = v_left - v_right`` at interior nodes and ``[v] = v n`` at
the two boundary nodes. Each element carries a modal basis of Legendre
polynomials mapped to the element, so element mass matrices are diagonal and
coarse functions embed exactly into nested fine meshes.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from typing import Callable

import numpy as np
from numpy.polynomial import legendre as npleg

from .errors import ConfigError, InvalidElementCount, OutOfDomain


#: sign of the adjoint consistency term -{eps w'}[u]; "incomplete" omits it
IP_VARIANTS = {"incomplete": 0.0, "symmetric": 1.0, "nonsymmetric": -1.0}


def default_penalty(r: int) -> float:
    return 10.0 * (r + 1) ** 2


@dataclass(frozen=True)
class ProblemConfig:
    """Coefficients and discretization parameters.

    ``source`` is either a callable ``f(x)`` or the name of a manufactured
    case (see ``MANUFACTURED``). ``penalty_ce`` defaults to ``10 (r+1)^2``.
    """

    epsilon: float = 1.0
    b: float = 0.0
    gamma: float = 0.0
    domain: tuple[float, float] = (0.0, 1.0)
    source: Callable | str | None = None
    penalty_ce: float | None = None
    degree_r: int = 1
    boundary_only_penalty: bool = False
    ip_variant: str = "incomplete"

    def __post_init__(self):
        if self.penalty_ce is None:
            object.__setattr__(self, "penalty_ce", default_penalty(self.degree_r))
        if not callable(self.epsilon) and not self.epsilon > 0:
            raise ConfigError(f"epsilon must be positive, got {self.epsilon}")
        if not self.penalty_ce > 0:
            raise ConfigError(f"penalty_ce must be positive, got {self.penalty_ce}")
        if int(self.degree_r) != self.degree_r or self.degree_r < 1:
            raise ConfigError(f"degree_r must be an integer >= 1, got {self.degree_r}")
        if self.ip_variant not in IP_VARIANTS:
            raise ConfigError(f"ip_variant must be one of {IP_VARIANTS}")
        a, c = self.domain
        if not a < c:
            raise ConfigError(f"empty domain {self.domain}")

    def with_(self, **changes) -> "ProblemConfig":
        return replace(self, **changes)

    def source_function(self) -> Callable:
        if self.source is None:
            return lambda x: np.zeros_like(np.asarray(x, dtype=float))
        if callable(self.source):
            return self.source
        return manufactured(self.source, self).source


@dataclass(frozen=True)
class Mesh1D:
    nodes: np.ndarray

    @property
    def m(self) -> int:
        return len(self.nodes) - 1

    @property
    def widths(self) -> np.ndarray:
        return np.diff(self.nodes)

    @property
    def domain(self) -> tuple[float, float]:
        return float(self.nodes[0]), float(self.nodes[-1])


def build_mesh(m: int, domain=(0.0, 1.0)) -> Mesh1D:
    """Uniform mesh with ``m`` elements."""
    if int(m) != m or m < 1:
        raise InvalidElementCount(f"element count must be >= 1, got {m}")
    a, c = map(float, domain)
    nodes = a + (c - a) * (np.arange(m + 1) / m)
    nodes[-1] = c
    return Mesh1D(nodes)


@dataclass(frozen=True)
class DGSpace:
    mesh: Mesh1D
    degree: int

    @property
    def nloc(self) -> int:
        return self.degree + 1

    @property
    def ndofs(self) -> int:
        return self.mesh.m * self.nloc

    def dofs(self, k: int) -> slice:
        """Global dof range of element ``k``."""
        return slice(k * self.nloc, (k + 1) * self.nloc)

    def locate(self, x: float) -> int:
        """Element owning ``x``; element boundaries go to the left element."""
        a, c = self.mesh.domain
        if not a <= x <= c:
            raise OutOfDomain(f"x = {x} outside [{a}, {c}]")
        k = int(np.searchsorted(self.mesh.nodes, x, side="left")) - 1
        return min(max(k, 0), self.mesh.m - 1)

    def to_reference(self, k: int, x):
        xa, xb = self.mesh.nodes[k], self.mesh.nodes[k + 1]
        return (2.0 * np.asarray(x, dtype=float) - xa - xb) / (xb - xa)


def legendre_table(r: int, xi) -> np.ndarray:
    """Values ``P_k(xi)`` for k = 0..r, shape ``(r+1, len(xi))``."""
    xi = np.atleast_1d(np.asarray(xi, dtype=float))
    return np.array([npleg.legval(xi, np.eye(r + 1)[k]) for k in range(r + 1)])


def legendre_deriv_table(r: int, xi) -> np.ndarray:
    """Values ``P_k'(xi)`` on the reference interval."""
    xi = np.atleast_1d(np.asarray(xi, dtype=float))
    return np.array(
        [npleg.legval(xi, npleg.legder(np.eye(r + 1)[k])) for k in range(r + 1)]
    )


def quadrature_points(r: int) -> int:
    return math.ceil((2 * r + 2) / 2) + 1


@dataclass(frozen=True)
class DGSystem:
    space: DGSpace
    A: np.ndarray
    f: np.ndarray
    config: ProblemConfig

    @property
    def n(self) -> int:
        return self.space.ndofs


def _coefficient(c, x):
    if callable(c):
        return np.asarray(c(x), dtype=float) * np.ones_like(x)
    return float(c) * np.ones_like(x)


def _edge_lengths(mesh: Mesh1D) -> np.ndarray:
    """|e| per node: mean of the adjacent element widths."""
    w = mesh.widths
    lengths = np.empty(mesh.m + 1)
    lengths[0], lengths[-1] = w[0], w[-1]
    lengths[1:-1] = 0.5 * (w[:-1] + w[1:])
    return lengths


def assemble_stiffness(space: DGSpace, cfg: ProblemConfig) -> np.ndarray:
    """Stiffness matrix with ``A[i, j] = a(phi_j, phi_i)``."""
    r, nl, mesh = space.degree, space.nloc, space.mesh
    n = space.ndofs
    A = np.zeros((n, n))
    xi, wq = npleg.leggauss(quadrature_points(r))
    V = legendre_table(r, xi)
    D = legendre_deriv_table(r, xi)

    for k in range(mesh.m):
        xa, xb = mesh.nodes[k], mesh.nodes[k + 1]
        h = xb - xa
        x = 0.5 * (xa + xb) + 0.5 * h * xi
        jac = 0.5 * h
        dV = D / jac
        eps = _coefficient(cfg.epsilon, x)
        b = _coefficient(cfg.b, x)
        gam = _coefficient(cfg.gamma, x)
        w = wq * jac
        # rows: test functions, cols: trial functions
        local = (V * (w * gam)) @ V.T
        local += (dV * (w * eps)) @ dV.T
        local -= (dV * (w * b)) @ V.T
        A[space.dofs(k), space.dofs(k)] += local

    # traces on the reference element: right end (xi=+1) and left end (xi=-1)
    t_right = legendre_table(r, 1.0)[:, 0]
    t_left = legendre_table(r, -1.0)[:, 0]
    d_right = legendre_deriv_table(r, 1.0)[:, 0]
    d_left = legendre_deriv_table(r, -1.0)[:, 0]
    lengths = _edge_lengths(mesh)
    ce = cfg.penalty_ce
    nodes = mesh.nodes
    adjoint = IP_VARIANTS[cfg.ip_variant]

    for e in range(mesh.m + 1):
        xe = nodes[e]
        eps = float(_coefficient(cfg.epsilon, np.array([xe]))[0])
        b = float(_coefficient(cfg.b, np.array([xe]))[0])
        sides = []  # (element, trace values, derivative traces, outward normal)
        if e > 0:
            h = mesh.widths[e - 1]
            sides.append((e - 1, t_right, d_right * 2.0 / h, 1.0))
        if e < mesh.m:
            h = mesh.widths[e]
            sides.append((e, t_left, d_left * 2.0 / h, -1.0))
        interior = len(sides) == 2
        skeleton_term = not (interior and cfg.boundary_only_penalty)

        for kw, tw, dw, nw in sides:
            for ku, tu, du, nu in sides:
                # [u][w] with [v] = sum over sides of v n
                block = np.zeros((nl, nl))
                if skeleton_term:
                    block += ce * eps / lengths[e] * nu * nw * np.outer(tw, tu)
                    avg = 0.5 if interior else 1.0
                    block -= avg * eps * nw * np.outer(tw, du)
                    if adjoint:
                        block -= adjoint * avg * eps * nu * np.outer(dw, tu)
                if interior:
                    upwind = 0.5 * (np.sign(b * nu) + 1.0)
                    block += upwind * b * nw * np.outer(tw, tu)
                elif b * nu >= 0.0:
                    block += b * nu * np.outer(tw, tu)
                A[space.dofs(kw), space.dofs(ku)] += block
    return A


def assemble_load(space: DGSpace, source: Callable | None) -> np.ndarray:
    """Load vector ``f_i = int f phi_i`` by Gauss-Legendre quadrature."""
    r, mesh = space.degree, space.mesh
    f = np.zeros(space.ndofs)
    if source is None:
        return f
    xi, wq = npleg.leggauss(max(quadrature_points(r), r + 4))
    V = legendre_table(r, xi)
    for k in range(mesh.m):
        xa, xb = mesh.nodes[k], mesh.nodes[k + 1]
        x = 0.5 * (xa + xb) + 0.5 * (xb - xa) * xi
        fx = np.asarray(source(x), dtype=float) * np.ones_like(x)
        f[space.dofs(k)] = V @ (wq * 0.5 * (xb - xa) * fx)
    return f


def assemble(cfg: ProblemConfig, m: int) -> DGSystem:
    space = DGSpace(build_mesh(m, cfg.domain), cfg.degree_r)
    A = assemble_stiffness(space, cfg)
    f = assemble_load(space, cfg.source_function())
    return DGSystem(space, A, f, cfg)


def evaluate(space: DGSpace, coeffs, x: float) -> float:
    k = space.locate(x)
    xi = space.to_reference(k, x)
    vals = legendre_table(space.degree, xi)[:, 0]
    return float(np.dot(np.asarray(coeffs)[space.dofs(k)], vals))


def evaluate_many(space: DGSpace, coeffs, xs) -> np.ndarray:
    return np.array([evaluate(space, coeffs, x) for x in np.atleast_1d(xs)])


def error_norms(space: DGSpace, coeffs, exact: Callable, exact_deriv: Callable,
                npoints: int | None = None) -> tuple[float, float]:
    """``(||u_h - u||_L2, |u_h - u|_H1 broken)`` by element-wise quadrature."""
    r, mesh = space.degree, space.mesh
    xi, wq = npleg.leggauss(npoints or r + 8)
    V = legendre_table(r, xi)
    D = legendre_deriv_table(r, xi)
    coeffs = np.asarray(coeffs, dtype=float)
    l2 = h1 = 0.0
    for k in range(mesh.m):
        xa, xb = mesh.nodes[k], mesh.nodes[k + 1]
        jac = 0.5 * (xb - xa)
        x = 0.5 * (xa + xb) + jac * xi
        c = coeffs[space.dofs(k)]
        eu = c @ V - exact(x)
        ed = (c @ D) / jac - exact_deriv(x)
        l2 += np.sum(wq * jac * eu**2)
        h1 += np.sum(wq * jac * ed**2)
    return math.sqrt(l2), math.sqrt(h1)


# -- manufactured solutions -------------------------------------------------


@dataclass(frozen=True)
class Manufactured:
    name: str
    exact: Callable
    exact_deriv: Callable
    source: Callable = field(repr=False)


def _layer_profile(x, peclet):
    """``(exp(P x) - 1) / (exp(P) - 1)`` and its x-derivative, overflow-safe."""
    x = np.asarray(x, dtype=float)
    if peclet == 0.0:
        return x, np.ones_like(x)
    if peclet > 0:
        denom = -np.expm1(-peclet)
        val = np.exp(peclet * (x - 1.0)) * -np.expm1(-peclet * x) / denom
        der = peclet * np.exp(peclet * (x - 1.0)) / denom
    else:
        denom = np.expm1(peclet)
        val = np.expm1(peclet * x) / denom
        der = peclet * np.exp(peclet * x) / denom
    return val, der


def manufactured(name: str, cfg: ProblemConfig) -> Manufactured:
    """Exact solution, derivative and matching source for constant coefficients.

    Known names: ``sin``, ``poly``, ``boundary-layer`` (all on (0, 1)).
    """
    eps, b, gam = float(cfg.epsilon), float(cfg.b), float(cfg.gamma)
    pi = math.pi
    if name == "sin":
        u = lambda x: np.sin(pi * np.asarray(x))
        du = lambda x: pi * np.cos(pi * np.asarray(x))
        f = lambda x: (eps * pi**2 + gam) * np.sin(pi * np.asarray(x)) + b * pi * np.cos(
            pi * np.asarray(x)
        )
    elif name == "poly":
        u = lambda x: np.asarray(x) * (1.0 - np.asarray(x))
        du = lambda x: 1.0 - 2.0 * np.asarray(x)
        f = lambda x: 2.0 * eps + b * (1.0 - 2.0 * np.asarray(x)) + gam * u(x)
    elif name == "boundary-layer":
        P = b / eps
        u = lambda x: np.asarray(x) - _layer_profile(x, P)[0]
        du = lambda x: 1.0 - _layer_profile(x, P)[1]
        f = lambda x: b + gam * u(x)
    else:
        raise ConfigError(f"unknown manufactured case {name!r}; known: {sorted(MANUFACTURED)}")
    return Manufactured(name, u, du, f)


MANUFACTURED = ("sin", "poly", "boundary-layer")
