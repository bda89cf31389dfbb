"""Closed-form one-dimensional optimal phase-field profiles.

All profiles live on the half interval ``[0, L]`` with the crack at ``x = 0``;
use :func:`mirror` for the full interval.  Every evaluator accepts
``deriv in {0, 1, 2}`` so that strong-form residuals and energy integrands
can be formed without finite differences.

Exponentials are always written with non-positive arguments, e.g.
``exp(-a x) + exp(-a (2L - x))`` instead of ``exp(a x) * exp(-2 a L)``, so
the formulas stay finite for large penalties and long domains.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass

import numpy as np

from .errors import DomainError
from .model import ModelKind

_XTOL = 1e-12


def _check_x(x, L):
    x = np.asarray(x, dtype=float)
    if np.any(x < -_XTOL * L) or np.any(x > L * (1 + _XTOL)):
        raise DomainError(f"x must lie in [0, L={L}]")
    return x


def _check_ratio(ell, L):
    if not (ell > 0 and L > 0):
        raise DomainError("length scale and half length must be positive")
    if L < 2.0 * ell * (1 - 1e-14):
        raise DomainError(f"L/ell = {L / ell:g} < 2 is not admissible")


def _check_penalty(p, name):
    if not p > 0:
        raise DomainError(f"{name} must be > 0, got {p}")


def _exp_terms(x, a, terms, deriv):
    """Sum of ``c * exp(-a * (off + sgn * x))`` and its derivatives."""
    out = np.zeros_like(x)
    for c, off, sgn in terms:
        out += c * (-a * sgn) ** deriv * np.exp(-a * (off + sgn * x))
    return out


def _poly2(x, c2, c1, c0, deriv):
    if deriv == 0:
        return c2 * x * x + c1 * x + c0
    if deriv == 1:
        return 2 * c2 * x + c1
    return np.full_like(x, 2 * c2)


# -- unpenalized optimal profiles ------------------------------------------

def eval_linear_optimal(x, ell, L, deriv=0):
    """AT-1 optimal profile ``(1 - x/(2 ell))^2`` on ``[0, 2 ell)``, zero beyond."""
    _check_ratio(ell, L)
    x = _check_x(x, L)
    inner = _poly2(x, 1.0 / (4 * ell**2), -1.0 / ell, 1.0, deriv)
    return np.where(x < 2 * ell, inner, 0.0)


def eval_quadratic_optimal(x, ell, L, deriv=0):
    """AT-2 optimal profile ``cosh((L - x)/ell) / cosh(L/ell)``."""
    if not (ell > 0 and L > 0):
        raise DomainError("length scale and half length must be positive")
    x = _check_x(x, L)
    den = 1.0 + math.exp(-2 * L / ell)
    return _exp_terms(x, 1.0 / ell, [(1.0 / den, 0.0, 1.0), (1.0 / den, 2 * L, -1.0)], deriv)


def quadratic_optimal_energy(ratio):
    """Normalized surface energy tanh(L/ell) of the AT-2 optimal profile."""
    return math.tanh(ratio)


def eval_linear_unconstrained(x, ell, L, deriv=0):
    """Minimizer of the AT-1 energy when the bound alpha >= 0 is dropped."""
    if not (ell > 0 and L > 0):
        raise DomainError("length scale and half length must be positive")
    x = _check_x(x, L)
    return _poly2(x, 1.0 / (4 * ell**2), -L / (2 * ell**2), 1.0, deriv)


def linear_unconstrained_energy(ratio):
    """Its normalized energy ``-(L/ell)^3/16 + 3/4 (L/ell)``."""
    return -(ratio**3) / 16.0 + 0.75 * ratio


# -- gamma-penalized profiles -----------------------------------------------

def _gamma_linear_parts(x, ell, L, s, deriv):
    """Return the Newton corrections (d0, d1) of the AT-1 construction."""
    rs = math.sqrt(s)
    a = rs / ell
    em = math.expm1(-2 * a * L)          # exp(-2 sqrt(s) L/ell) - 1 < 0
    d0 = _exp_terms(x, a, [(1.0 / (rs * em), 0.0, 1.0), (1.0 / (rs * em), 2 * L, -1.0)], deriv)
    c = 1.0 / (4 * s * em)
    d = 2 * ell
    inner = _exp_terms(x, a, [(c, d, 1.0), (c, d, -1.0),
                               (-c, 2 * L - d, 1.0), (-c, 2 * L - d, -1.0)], deriv)
    outer = _exp_terms(x, a, [(c, d, 1.0), (-c, -d, 1.0),
                               (c, 2 * L + d, -1.0), (-c, 2 * L - d, -1.0)], deriv)
    if deriv == 0:
        outer = outer - 1.0 / (2 * s)
    # guard: evaluate each branch only through its own region
    d1 = np.where(x < d, inner, outer)
    return d0, d1


def eval_gamma_linear(x, ell, L, s, deriv=0):
    """AT-1 profile penalized against the optimal one: ``alpha* + d0 + d1``."""
    _check_ratio(ell, L)
    _check_penalty(s, "s")
    x = _check_x(x, L)
    with np.errstate(over="ignore", invalid="ignore"):
        d0, d1 = _gamma_linear_parts(x, ell, L, s, deriv)
    return eval_linear_optimal(x, ell, L, deriv) + d0 + d1


def gamma_linear_iterate(x, ell, L, s, n_corrections):
    """Partial Newton sums: 0 -> alpha*, 1 -> alpha* + d0, 2 -> full profile."""
    _check_ratio(ell, L)
    x = _check_x(x, L)
    out = eval_linear_optimal(x, ell, L)
    if n_corrections >= 1:
        with np.errstate(over="ignore", invalid="ignore"):
            d0, d1 = _gamma_linear_parts(x, ell, L, s, 0)
        out = out + d0
        if n_corrections >= 2:
            out = out + d1
    return out


def eval_gamma_quadratic(x, ell, L, s, deriv=0):
    """AT-2 profile penalized against the optimal one: ``alpha* + d0``."""
    if not (ell > 0 and L > 0):
        raise DomainError("length scale and half length must be positive")
    if L < 2 * ell * (1 - 1e-14):
        raise DomainError(f"L/ell = {L / ell:g} < 2 is not admissible")
    _check_penalty(s, "s")
    x = _check_x(x, L)
    k = math.sqrt(s + 1.0)
    b = k / ell
    c = math.tanh(L / ell) / (k * math.expm1(-2 * b * L))
    d0 = _exp_terms(x, b, [(c, 0.0, 1.0), (c, 2 * L, -1.0)], deriv)
    return eval_quadratic_optimal(x, ell, L, deriv) + d0


# -- rho-penalized AT-1 recovery profile ------------------------------------

def xhat_star(r, ell):
    """Zero of the recovered profile, the fixed point of the recursion."""
    _check_penalty(r, "r")
    return ell * (math.sqrt(1.0 / r + 4.0) - 1.0 / math.sqrt(r))


def coeff_R(r, ell):
    """Linear coefficient of the parabolic branch at the fixed point."""
    _check_penalty(r, "r")
    return -math.sqrt(1.0 / r + 4.0) / (2.0 * ell)


def coeff_T(r):
    """Amplitude of the tail ``T exp(-sqrt(r) x/ell)`` at the fixed point."""
    _check_penalty(r, "r")
    return math.exp(-1.0 + math.sqrt(1.0 + 4.0 * r)) / (2.0 * r)


def _rho_branches(x, ell, r, xh, R, tail_at_xh, deriv):
    a = math.sqrt(r) / ell
    par = _poly2(x, 1.0 / (4 * ell**2), R, 1.0, deriv)
    # tail written relative to xh: tail_at_xh * exp(-a (x - xh)) - 1/(2r)
    with np.errstate(over="ignore"):
        tail = _exp_terms(x, a, [(tail_at_xh, -xh, 1.0)], deriv)
    if deriv == 0:
        tail = tail - 1.0 / (2 * r)
    return np.where(x < xh, par, tail)


def eval_rho_profile(x, ell, L, r, deriv=0):
    """AT-1 recovery profile with the bound alpha >= 0 penalized by ``r``."""
    _check_penalty(r, "r")
    xs = xhat_star(r, ell)
    if not L > xs:
        raise DomainError(f"L = {L} must exceed xhat* = {xs}")
    x = _check_x(x, L)
    # at the fixed point the tail equals 1/(2r) + 0 at xhat*, i.e. alpha(xhat*) = 0
    return _rho_branches(x, ell, r, xs, coeff_R(r, ell), 1.0 / (2 * r), deriv)


def rho_iterate_coefficients(xhat_i, r, ell):
    """R and tail value at ``xhat_i`` for one recursion update.

    The returned ``B`` is the tail value minus its constant, taken at
    ``xhat_i``; the tail of the iterate is ``B exp(-sqrt(r)(x - xhat_i)/ell) - 1/(2r)``.
    """
    q = math.sqrt(r) / ell
    num = 1.0 + 1.0 / (2 * r) - xhat_i**2 / (4 * ell**2)
    den = 1.0 + q * xhat_i
    B = num / den
    return -(xhat_i / (2 * ell**2) + q * B), B


def eval_rho_iterate(x, ell, L, r, xhat_i, deriv=0):
    """Iterate built from the zero ``xhat_i`` of the previous one."""
    x = _check_x(x, L)
    R, B = rho_iterate_coefficients(xhat_i, r, ell)
    return _rho_branches(x, ell, r, xhat_i, R, B, deriv)


def rho_recursion_step(xhat_i, r, ell):
    """Zero of the iterate built from ``xhat_i``."""
    _check_penalty(r, "r")
    q = math.sqrt(r) / ell
    arg = (1.0 + 2 * r - r * xhat_i**2 / (2 * ell**2)) / (1.0 + q * xhat_i)
    if not arg > 0:
        raise DomainError(f"xhat_i = {xhat_i} is outside the recursion's domain")
    return xhat_i + math.log(arg) / q


def rho_recursion_seed(ell, L):
    """Zero of the unconstrained parabola, ``L - sqrt(L^2 - 4 ell^2)``."""
    _check_ratio(ell, L)
    return L - math.sqrt(L * L - 4 * ell * ell)


def rho_recursion(r, ell, L, n_iter=50):
    """Sequence ``[xhat_0, ..., xhat_n]`` started from the seed."""
    seq = [rho_recursion_seed(ell, L)]
    for _ in range(n_iter):
        seq.append(rho_recursion_step(seq[-1], r, ell))
    return np.array(seq)


# -- a uniform handle --------------------------------------------------------

class ProfileKind(enum.Enum):
    LINEAR_OPTIMAL = "LinearOptimal"
    QUADRATIC_OPTIMAL = "QuadraticOptimal"
    LINEAR_UNCONSTRAINED = "LinearUnconstrained"
    GAMMA_LINEAR = "GammaPenalizedLinear"
    GAMMA_QUADRATIC = "GammaPenalizedQuadratic"
    RHO = "RhoPenalized"


@dataclass(frozen=True)
class Profile1D:
    """A closed-form profile with its parameters.

    ``penalty`` is the dimensionless ``s`` for the gamma kinds and ``r`` for
    the recovery kind; it is ignored otherwise.
    """

    kind: ProfileKind
    half_length: float
    length_scale: float
    penalty: float | None = None

    def __post_init__(self):
        ell, L = self.length_scale, self.half_length
        if not (ell > 0 and L > 0):
            raise DomainError("length scale and half length must be positive")
        if self.kind in (ProfileKind.GAMMA_LINEAR, ProfileKind.GAMMA_QUADRATIC, ProfileKind.RHO):
            if self.penalty is None or not self.penalty > 0:
                raise DomainError(f"{self.kind.value} needs a positive penalty")
        if self.kind in (ProfileKind.LINEAR_OPTIMAL, ProfileKind.GAMMA_LINEAR,
                         ProfileKind.GAMMA_QUADRATIC, ProfileKind.RHO):
            _check_ratio(ell, L)

    @property
    def model(self) -> ModelKind:
        quad = (ProfileKind.QUADRATIC_OPTIMAL, ProfileKind.GAMMA_QUADRATIC)
        return ModelKind.AT2 if self.kind in quad else ModelKind.AT1

    @property
    def kinks(self) -> tuple:
        """Points where the second derivative may jump."""
        ell = self.length_scale
        if self.kind in (ProfileKind.LINEAR_OPTIMAL, ProfileKind.GAMMA_LINEAR):
            return (2 * ell,)
        if self.kind is ProfileKind.RHO:
            return (xhat_star(self.penalty, ell),)
        return ()

    def __call__(self, x, deriv=0):
        ell, L, p = self.length_scale, self.half_length, self.penalty
        k = self.kind
        if k is ProfileKind.LINEAR_OPTIMAL:
            return eval_linear_optimal(x, ell, L, deriv)
        if k is ProfileKind.QUADRATIC_OPTIMAL:
            return eval_quadratic_optimal(x, ell, L, deriv)
        if k is ProfileKind.LINEAR_UNCONSTRAINED:
            return eval_linear_unconstrained(x, ell, L, deriv)
        if k is ProfileKind.GAMMA_LINEAR:
            return eval_gamma_linear(x, ell, L, p, deriv)
        if k is ProfileKind.GAMMA_QUADRATIC:
            return eval_gamma_quadratic(x, ell, L, p, deriv)
        return eval_rho_profile(x, ell, L, p, deriv)

    def reference(self, x, deriv=0):
        """The unpenalized optimal profile the gamma kinds are penalized against."""
        if self.model is ModelKind.AT1:
            return eval_linear_optimal(x, self.length_scale, self.half_length, deriv)
        return eval_quadratic_optimal(x, self.length_scale, self.half_length, deriv)

    def strong_residual(self, x):
        """Residual of the governing ODE divided by ell^2 (units 1/length^2).

        Gamma kinds: ``-a'' + (w'(a)/2 + s <a - a*>_-) / ell^2``.
        Recovery kind: ``-a'' + (1/2 + r <a>_-) / ell^2``.
        """
        ell2 = self.length_scale**2
        a, a2 = self(x), self(x, 2)
        if self.kind in (ProfileKind.GAMMA_LINEAR, ProfileKind.GAMMA_QUADRATIC):
            wp = 1.0 if self.model is ModelKind.AT1 else 2.0 * a
            return -a2 + (0.5 * wp + self.penalty * np.minimum(0.0, a - self.reference(x))) / ell2
        if self.kind is ProfileKind.RHO:
            return -a2 + (0.5 + self.penalty * np.minimum(0.0, a)) / ell2
        if self.kind is ProfileKind.QUADRATIC_OPTIMAL:
            return -a2 + a / ell2
        return -a2 + 0.5 / ell2


def mirror(x, values):
    """Extend half-interval samples to ``[-L, L]`` using alpha(-x) = alpha(x)."""
    x = np.asarray(x, dtype=float)
    values = np.asarray(values, dtype=float)
    keep = x > 0
    return (np.concatenate([-x[keep][::-1], x]),
            np.concatenate([values[keep][::-1], values]))


def write_profile_csv(path, x, alpha):
    """ASCII dump with a single ``x,alpha`` header line."""
    data = np.column_stack([np.asarray(x, float), np.asarray(alpha, float)])
    np.savetxt(path, data, delimiter=",", header="x,alpha", comments="", fmt="%.16e")
