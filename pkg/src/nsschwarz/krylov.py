"""GMRES and the stationary multiplicative Schwarz iteration."""

from __future__ import annotations

import time
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .errors import Divergence, MaxIterExceeded

DEFAULT_TOL = 1e-8
DEFAULT_MAX_ITER = 1000


@dataclass
class SolveStats:
    iterations: int = 0
    residual_history: list[float] = field(default_factory=list)
    converged: bool = False
    wall_time: float = 0.0
    final_relative_residual: float = float("nan")
    true_relative_residual: float = float("nan")
    breakdown: bool = False


def _as_action(op) -> Callable:
    if callable(op):
        return op
    M = np.asarray(op, dtype=float)
    return lambda v: M @ v


def _givens(a, b):
    if b == 0.0:
        return 1.0, 0.0
    h = np.hypot(a, b)
    return a / h, b / h


def gmres(op, rhs, tol=DEFAULT_TOL, max_iter=DEFAULT_MAX_ITER, restart=None,
          strict=False):
    """Unrestarted (by default) GMRES from ``x0 = 0``.

    Arnoldi uses modified Gram-Schmidt with one reorthogonalization pass, the
    Hessenberg matrix is reduced by Givens rotations, and
    ``stats.residual_history`` records the rotated residual ``|g_k|`` after
    each step (index 0 is ``||rhs||``). Convergence means
    ``||rhs - op x|| / ||rhs|| <= tol`` for the explicitly recomputed
    residual; when the recurrence claims convergence but the explicit residual
    disagrees, the solver restarts from the current iterate.

    Returns ``(x, stats)``. With ``strict=True`` a missed tolerance raises
    MaxIterExceeded carrying the best iterate.
    """
    t0 = time.perf_counter()
    apply = _as_action(op)
    b = np.asarray(rhs, dtype=float)
    n = b.shape[0]
    stats = SolveStats()
    bnorm = np.linalg.norm(b)
    x = np.zeros(n)
    if bnorm == 0.0:
        stats.converged = True
        stats.final_relative_residual = 0.0
        stats.residual_history = [0.0]
        stats.wall_time = time.perf_counter() - t0
        return x, stats

    cycle = restart or max_iter
    r = b.copy()
    beta = bnorm
    stats.residual_history.append(beta)
    while stats.iterations < max_iter:
        m = min(cycle, max_iter - stats.iterations)
        V = np.zeros((m + 1, n))
        H = np.zeros((m + 1, m))
        cs = np.zeros(m)
        sn = np.zeros(m)
        g = np.zeros(m + 1)
        g[0] = beta
        V[0] = r / beta
        k = 0
        for k in range(m):
            w = apply(V[k])
            for _ in range(2):
                for i in range(k + 1):
                    hij = V[i] @ w
                    H[i, k] += hij
                    w -= hij * V[i]
            H[k + 1, k] = np.linalg.norm(w)
            for i in range(k):
                t = cs[i] * H[i, k] + sn[i] * H[i + 1, k]
                H[i + 1, k] = -sn[i] * H[i, k] + cs[i] * H[i + 1, k]
                H[i, k] = t
            hk1 = H[k + 1, k]
            cs[k], sn[k] = _givens(H[k, k], hk1)
            H[k, k] = cs[k] * H[k, k] + sn[k] * hk1
            H[k + 1, k] = 0.0
            g[k + 1] = -sn[k] * g[k]
            g[k] = cs[k] * g[k]
            stats.iterations += 1
            stats.residual_history.append(abs(g[k + 1]))
            happy = hk1 <= 1e-14 * np.linalg.norm(H[:k + 2, k])
            if happy:
                stats.breakdown = True
            if abs(g[k + 1]) <= tol * bnorm or happy:
                break
            V[k + 1] = w / hk1
        y = np.linalg.solve(np.triu(H[:k + 1, :k + 1]), g[:k + 1]) if k + 1 else g[:0]
        x = x + V[:k + 1].T @ y
        r = b - apply(x)
        beta = np.linalg.norm(r)
        if beta <= tol * bnorm:
            stats.converged = True
            break
        if stats.breakdown:
            break
    stats.final_relative_residual = float(beta / bnorm)
    stats.true_relative_residual = stats.final_relative_residual
    stats.wall_time = time.perf_counter() - t0
    if strict and not stats.converged:
        raise MaxIterExceeded(x, stats)
    return x, stats


def preconditioned_solve(A, B_action, f, tol=DEFAULT_TOL, max_iter=DEFAULT_MAX_ITER,
                         side="left", restart=None, strict=False):
    """GMRES on ``B A x = B f`` (left) or ``A B y = f, x = B y`` (right).

    Convergence is judged on the residual of the system GMRES sees; the
    unpreconditioned relative residual ``||f - A x|| / ||f||`` of the final
    iterate is reported in ``stats.true_relative_residual``.
    """
    A_act = _as_action(A)
    B_act = _as_action(B_action)
    f = np.asarray(f, dtype=float)
    if side == "left":
        x, stats = gmres(lambda v: B_act(A_act(v)), B_act(f), tol, max_iter,
                         restart=restart, strict=strict)
    elif side == "right":
        y, stats = gmres(lambda v: A_act(B_act(v)), f, tol, max_iter,
                         restart=restart, strict=strict)
        x = B_act(y)
    else:
        raise ValueError(f"side must be 'left' or 'right', got {side!r}")
    fnorm = np.linalg.norm(f)
    stats.true_relative_residual = float(
        np.linalg.norm(f - A_act(x)) / fnorm) if fnorm else 0.0
    return x, stats


def multiplicative_iterate(ops, f, tol=DEFAULT_TOL, max_iter=DEFAULT_MAX_ITER,
                           symmetrized=False, x0=None, strict=False,
                           divergence_factor=1e6):
    """Repeat multiplicative Schwarz sweeps until the true residual drops below ``tol``.

    Raises Divergence when the residual exceeds ``divergence_factor`` times
    its initial value.
    """
    t0 = time.perf_counter()
    f = np.asarray(f, dtype=float)
    x = np.zeros(ops.n) if x0 is None else np.array(x0, dtype=float)
    fnorm = np.linalg.norm(f)
    stats = SolveStats()
    res = np.linalg.norm(f - ops.A @ x)
    r0 = res
    stats.residual_history.append(res)
    scale = fnorm if fnorm else 1.0
    while res > tol * scale and stats.iterations < max_iter:
        x = ops.multiplicative_sweep(x, f, symmetrized)
        res = np.linalg.norm(f - ops.A @ x)
        stats.iterations += 1
        stats.residual_history.append(res)
        if not np.isfinite(res) or res > divergence_factor * r0:
            stats.final_relative_residual = float(res / scale)
            stats.wall_time = time.perf_counter() - t0
            raise Divergence(x, stats)
    stats.converged = bool(res <= tol * scale)
    stats.final_relative_residual = stats.true_relative_residual = float(res / scale)
    stats.wall_time = time.perf_counter() - t0
    if strict and not stats.converged:
        raise MaxIterExceeded(x, stats)
    return x, stats
