"""Finite-difference reference solver for the penalized 1D boundary value problems.

This module shares nothing with :mod:`pfpenalty.profiles` except the
unpenalized reference profile the gamma problems are penalized against.
The grid is uniform on ``[0, L]``; interior rows use the three-point
second difference, Neumann ends use the one-sided second-order stencil
``(-3 a_0 + 4 a_1 - a_2) / 2h``.  The piecewise-linear equations are solved
by semismooth Newton, which terminates once the residual is at round-off
level after at least one Newton update.
"""

from __future__ import annotations

import math

import numpy as np
import scipy.sparse as sp
import scipy.sparse.linalg as spla

from .errors import ConvergenceError, DomainError
from .model import ModelKind
from .profiles import ProfileKind, eval_linear_optimal, eval_quadratic_optimal

MAX_ITER = 200


def _operator(n, h, ell, left_dirichlet):
    """Rows of the linear part: -ell^2 a'' inside, boundary rows at both ends."""
    c = ell * ell / (h * h)
    rows, cols, vals = [], [], []
    i = np.arange(1, n - 1)
    for off, v in ((-1, -c), (0, 2 * c), (1, -c)):
        rows.append(i)
        cols.append(i + off)
        vals.append(np.full(i.size, v))
    # Neumann rows carry the factor c * h / 2 so all rows have the same size
    if left_dirichlet:
        rows.append(np.array([0]))
        cols.append(np.array([0]))
        vals.append(np.array([c]))
    else:
        rows.append(np.zeros(3, int))
        cols.append(np.array([0, 1, 2]))
        vals.append(np.array([-3.0, 4.0, -1.0]) * 0.5 * c)
    rows.append(np.full(3, n - 1))
    cols.append(np.array([n - 1, n - 2, n - 3]))
    vals.append(np.array([3.0, -4.0, 1.0]) * 0.5 * c)
    A = sp.csr_matrix((np.concatenate(vals), (np.concatenate(rows), np.concatenate(cols))),
                      shape=(n, n))
    return A


def fd_oracle_solve(kind, ell, L, penalty, grid_n=100, return_grid=False, max_iter=MAX_ITER):
    """Solve a penalized 1D profile problem on a uniform grid.

    Parameters
    ----------
    kind : ProfileKind
        ``GAMMA_LINEAR``, ``GAMMA_QUADRATIC`` or ``RHO``.
    ell, L : float
        Length scale and half length.
    penalty : float
        Dimensionless ``s`` (gamma kinds) or ``r`` (recovery kind).
    grid_n : int
        Grid intervals per unit ``ell``; at least 100.  ``L/ell * grid_n``
        is rounded to the nearest integer.

    Returns
    -------
    ndarray of nodal values, or ``(x, alpha)`` when ``return_grid`` is set.
    """
    if not penalty > 0:
        raise DomainError(f"penalty must be > 0, got {penalty}")
    if grid_n < 100:
        raise DomainError("grid_n must be at least 100 intervals per length scale")
    if L < 2 * ell * (1 - 1e-14):
        raise DomainError("L/ell must be at least 2")
    kind = ProfileKind(kind)
    if kind not in (ProfileKind.GAMMA_LINEAR, ProfileKind.GAMMA_QUADRATIC, ProfileKind.RHO):
        raise DomainError(f"no penalized problem for {kind.value}")

    m = int(round(L / ell * grid_n))
    n = m + 1
    x = np.linspace(0.0, L, n)
    h = L / m
    ell2 = ell * ell
    rho = kind is ProfileKind.RHO
    A = _operator(n, h, ell, left_dirichlet=rho)
    interior = np.zeros(n, bool)
    interior[1:-1] = True

    if rho:
        target = np.zeros(n)
        ref = None
        alpha = np.clip(1.0 - x / (2 * ell), 0.0, 1.0) ** 2
    else:
        model = ModelKind.AT1 if kind is ProfileKind.GAMMA_LINEAR else ModelKind.AT2
        ref = (eval_linear_optimal(x, ell, L) if model is ModelKind.AT1
               else eval_quadratic_optimal(x, ell, L))
        target = ref
        alpha = ref.copy()
    p = penalty
    scale = max(1.0, ell2 / (h * h))
    bc = np.zeros(n)
    if rho:
        bc[0] = ell2 / (h * h)    # row 0 reads c * a_0 = c * 1

    def residual(a):
        viol = np.minimum(0.0, a - target)
        if rho:
            src = 0.5 + p * viol
        elif kind is ProfileKind.GAMMA_LINEAR:
            src = 0.5 + p * viol
        else:
            src = a + p * viol
        return A @ a - bc + np.where(interior, src, 0.0)

    history = []
    last_active = None
    for _ in range(max_iter):
        res = residual(alpha)
        active = (alpha - target) <= 0.0
        rn = float(np.abs(res).max())
        history.append(rn)
        # a node sitting exactly on the switching surface may toggle forever
        # at round-off level, so a small residual alone also terminates
        if rn <= 1e-12 * scale and last_active is not None:
            break
        diag = p * active.astype(float)
        if kind is ProfileKind.GAMMA_QUADRATIC:
            diag = diag + 1.0
        J = A + sp.diags(np.where(interior, diag, 0.0))
        alpha = alpha - spla.spsolve(J.tocsc(), res)
        last_active = active
    else:
        raise ConvergenceError(f"FD oracle did not converge in {max_iter} iterations; "
                               f"last residual {history[-1]:.3e}", history=history)
    return (x, alpha) if return_grid else alpha


def sample_on_stations(x_grid, values, stations):
    """Linear interpolation of grid values onto coarser stations."""
    return np.interp(np.asarray(stations, float), x_grid, values)


def oracle_grid_for(penalty, base=100, boundary_layer_points=300):
    """Intervals per ell that put ``boundary_layer_points`` inside ell/sqrt(p)."""
    need = int(math.ceil(boundary_layer_points * math.sqrt(penalty)))
    k = max(1, -(-need // base))
    return base * k
