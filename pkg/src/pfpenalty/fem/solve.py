"""Sparse SPD solves and the constrained Newton iteration used by both sub-problems."""

from __future__ import annotations

import numpy as np
import scipy.sparse as sp
import scipy.sparse.linalg as spla

from ..errors import ConvergenceError, SolverError
from .assembly import LinearSystem

RESIDUAL_BOUND = 1e-10


def _relres(A, x, b):
    nb = np.linalg.norm(b)
    r = np.linalg.norm(A @ x - b)
    return r / nb if nb > 0 else r


def solve_spd(system: LinearSystem, method="direct", tol=RESIDUAL_BOUND, maxiter=None):
    """Solve ``A x = b`` for symmetric positive definite ``A``.

    ``method="direct"`` uses a sparse LU factorization followed by up to two
    steps of iterative refinement; ``method="cg"`` runs conjugate gradients
    with a Jacobi preconditioner and stops at breakdown (``p.Ap <= 0``).
    The solution is stored on ``system`` and returned.  A relative residual
    above ``tol`` raises :class:`SolverError` carrying the residual trace.
    """
    A, b, done = _trivial(system)
    if done:
        return system.solution
    trace = []
    if method == "direct":
        x = _refined(A, b, _factor(A), tol, trace)
    elif method == "cg":
        d = A.diagonal()
        if np.any(d <= 0):
            raise SolverError("matrix has a non-positive diagonal entry; not SPD", trace)
        x = _pcg(A, b, tol, maxiter or 10 * b.size, trace, lambda r: r / d)
    else:
        raise SolverError(f"unknown method {method!r}")
    return _accept(system, x, tol, trace)


def _trivial(system):
    A = sp.csr_matrix(system.matrix)
    b = np.asarray(system.rhs, float)
    if A.shape[0] != A.shape[1] or A.shape[0] != b.size:
        raise SolverError("matrix and right-hand side dimensions do not match")
    if b.size == 0 or not np.linalg.norm(b) > 0:
        system.solution = np.zeros_like(b)
        return A, b, True
    return A, b, False


def _accept(system, x, tol, trace):
    if not np.all(np.isfinite(x)) or trace[-1] > tol:
        raise SolverError(f"relative residual {trace[-1]:.3e} exceeds {tol:.1e}", trace)
    system.solution = x
    return x


def _factor(A):
    try:
        # minimum degree on A^T + A fills about half as much as COLAMD here
        return spla.splu(A.tocsc(), permc_spec="MMD_AT_PLUS_A")
    except RuntimeError as exc:
        raise SolverError(f"factorization failed: {exc}") from exc


def _refined(A, b, lu, tol, trace):
    """LU solve plus up to two steps of iterative refinement."""
    x = lu.solve(b)
    trace.append(_relres(A, x, b))
    for _ in range(2):
        if trace[-1] <= tol:
            break
        x = x + lu.solve(b - A @ x)
        trace.append(_relres(A, x, b))
    return x


def _pcg(A, b, tol, maxiter, trace, precond):
    x = np.zeros_like(b)
    r = b.copy()
    z = precond(r)
    p = z.copy()
    rz = r @ z
    nb = np.linalg.norm(b)
    for _ in range(maxiter):
        Ap = A @ p
        pAp = p @ Ap
        if not pAp > 0:
            raise SolverError("conjugate gradients broke down (p.Ap <= 0): matrix not SPD", trace)
        step = rz / pAp
        x += step * p
        r -= step * Ap
        trace.append(np.linalg.norm(r) / nb)
        if trace[-1] <= 0.1 * tol:
            break
        z = precond(r)
        rz_new = r @ z
        p = z + (rz_new / rz) * p
        rz = rz_new
    trace.append(_relres(A, x, b))
    return x


def newton(residual_fn, x0, free, measure, tol, max_iter=50, max_halvings=10, name="newton",
           energy_fn=None, linear_solver="direct"):
    """Newton iteration on the free entries of ``x``.

    ``residual_fn(x, tangent)`` returns ``(r, K)`` over all entries;
    ``measure(r)`` maps the free residual to the dimensionless norm compared
    with ``tol``.  Without ``energy_fn`` a full step that increases the norm
    is halved up to ``max_halvings`` times.  With ``energy_fn`` (the convex
    functional whose gradient is ``r``) steps are halved until the Armijo
    decrease condition holds, which rules out the cycling plain semismooth
    Newton can show on Macaulay terms.  ``linear_solver`` is a
    :func:`solve_spd` method name or a callable taking a
    :class:`LinearSystem`.  Returns ``(x, iterations, history)``.
    """
    if isinstance(linear_solver, str):
        def solve(system):
            return solve_spd(system, method=linear_solver)
    else:
        solve = linear_solver
    x = np.array(x0, dtype=float, copy=True)
    history = []
    r, K = residual_fn(x, True)
    norm = measure(r[free])
    history.append(norm)
    e_x = energy_fn(x) if energy_fn is not None else None
    it = 0
    while norm > tol:
        if it >= max_iter:
            raise ConvergenceError(f"{name}: no convergence after {max_iter} iterations "
                                   f"(residual {norm:.3e})", history)
        Kff = K[free][:, free]
        dx = solve(LinearSystem(Kff, -r[free]))
        slope = float(r[free] @ dx)
        step = 1.0
        for _ in range(max_halvings + 1):
            e_t = None
            trial = x.copy()
            trial[free] += step * dx
            r_t, K_t = residual_fn(trial, True)
            n_t = measure(r_t[free])
            if n_t <= tol:
                break
            if energy_fn is not None:
                e_t = energy_fn(trial)
                if e_t <= e_x + 1e-4 * step * slope + 1e-14 * abs(e_x):
                    break
            elif n_t <= norm:
                break
            step *= 0.5
        x, r, K, norm = trial, r_t, K_t, n_t
        if energy_fn is not None:
            e_x = e_t if e_t is not None else energy_fn(x)
        history.append(norm)
        it += 1
    return x, it, history
