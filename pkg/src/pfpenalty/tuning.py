"""Normalized surface energies of the penalized 1D profiles and penalty bounds.

The dimensionless penalties are ``s = (c_w/2) gamma ell / G_c`` for the
irreversibility penalty and ``r = (4/3) rho ell / G_c`` for the recovery
penalty.  ``F`` always denotes the penalized surface energy of the 1D
profile on ``[-L, L]`` divided by ``G_c``, whose target value is 1.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy import integrate, optimize

from .errors import DomainError
from .model import ModelKind
from .profiles import (eval_gamma_linear, eval_gamma_quadratic, eval_linear_optimal,
                       eval_quadratic_optimal, eval_rho_profile, xhat_star)

DEFAULT_TOL_IR = 0.01
DEFAULT_TOL_REC = 0.01


def _ratio_ok(ratio):
    if not ratio >= 2.0 * (1 - 1e-14):
        raise DomainError(f"L/ell must be >= 2, got {ratio}")


def _tol_ok(tol):
    if not 0.0 < tol <= 0.5:
        raise DomainError(f"tolerance must lie in (0, 0.5], got {tol}")


def _coth(z):
    return 1.0 / math.tanh(z)


# -- irreversibility penalty -----------------------------------------------

def F_gamma(model: ModelKind, s, ratio):
    """Leading-order normalized energy of the gamma-penalized profile."""
    _ratio_ok(ratio)
    if not s >= 1.0:
        raise DomainError(f"s must be >= 1, got {s}")
    if model is ModelKind.AT2:
        return 1.0 - 1.0 / math.sqrt(s + 1.0)
    if math.isclose(ratio, 2.0, rel_tol=0.0, abs_tol=1e-12):
        return 1.0 - 0.75 / math.sqrt(s)
    return 1.0 - 3.0 / (16.0 * s) * (ratio - 2.0) - 0.75 * s**-1.5 * (s - 0.125)


def F_gamma_exact(model: ModelKind, s, ratio):
    """Closed-form normalized energy including every exponential term."""
    _ratio_ok(ratio)
    if not s > 0:
        raise DomainError(f"s must be > 0, got {s}")
    if model is ModelKind.AT2:
        k = math.sqrt(s + 1.0)
        th = math.tanh(ratio)
        return th - th * th * _coth(k * ratio) / k
    rs = math.sqrt(s)
    q = 2.0 * rs * ratio
    t = 2.0 * rs
    eq = math.exp(-q)
    one_m = -math.expm1(-q)
    return (1.0
            - 3.0 / (16.0 * s) * (ratio - 2.0)
            - 0.75 / s * (math.exp(-t) - math.exp(t - q)) / one_m
            - 0.75 * s**-1.5 * (s - 0.125) * (1.0 + eq) / one_m
            - 3.0 / 32.0 * s**-1.5 * (math.exp(-2 * t) + math.exp(2 * t - q)) / one_m)


def F_gamma_quadrature(model: ModelKind, s, ratio, ell=1.0):
    """Quadrature of the penalized energy of the closed-form profile."""
    L = ratio * ell
    if model is ModelKind.AT1:
        prof, ref = eval_gamma_linear, eval_linear_optimal
        breaks = [2 * ell]
    else:
        prof, ref = eval_gamma_quadratic, eval_quadratic_optimal
        breaks = []
    layer = ell / math.sqrt(s)
    pts = sorted({min(L, b) for b in [layer, 5 * layer, 20 * layer] + breaks
                  + [b + d for b in breaks for d in (-20 * layer, -layer, layer, 20 * layer)]
                  if 0 < b < L})

    def integrand(x):
        xa = np.array([x])
        a = prof(xa, ell, L, s)[0]
        da = prof(xa, ell, L, s, 1)[0]
        w = a if model is ModelKind.AT1 else a * a
        v = min(0.0, a - ref(xa, ell, L)[0])
        return w / ell + ell * da * da + s / ell * v * v

    total = _integrate_pieces(integrand, 0.0, L, pts)
    return 2.0 / model.c_w * total


def _integrate_pieces(f, a, b, pts):
    edges = [a] + [p for p in pts if a < p < b] + [b]
    total = 0.0
    for lo, hi in zip(edges[:-1], edges[1:]):
        val, _ = integrate.quad(f, lo, hi, epsabs=1e-14, epsrel=1e-13, limit=200)
        total += val
    return total


def s_opt(model: ModelKind, tol_ir=DEFAULT_TOL_IR):
    """Smallest ``s`` with ``F_gamma = 1 - tol`` in the leading-order balance.

    Accepts ``tol`` in ``(0, 1]`` so the degenerate value ``tol = 1`` maps to
    ``s = 0`` for AT2; :class:`PenaltyBound` applies the stricter range.
    """
    if not 0.0 < tol_ir <= 1.0:
        raise DomainError(f"tolerance must lie in (0, 1], got {tol_ir}")
    if model is ModelKind.AT1:
        return 9.0 / (16.0 * tol_ir**2)
    return 1.0 / tol_ir**2 - 1.0


def gamma_from_s(model: ModelKind, s, toughness, length_scale):
    return 2.0 / model.c_w * toughness / length_scale * s


def s_from_gamma(model: ModelKind, gamma, toughness, length_scale):
    return 0.5 * model.c_w * gamma * length_scale / toughness


def gamma_opt(model: ModelKind, toughness, length_scale, tol_ir=DEFAULT_TOL_IR):
    """Physical irreversibility penalty (energy per volume)."""
    if not (toughness > 0 and length_scale > 0):
        raise DomainError("toughness and length scale must be positive")
    return gamma_from_s(model, s_opt(model, tol_ir), toughness, length_scale)


def solve_F_gamma(model: ModelKind, target, ratio, bracket=(1.0, 1e12)):
    """Root in ``s`` of ``F_gamma(model, s, ratio) = target``."""
    return optimize.brentq(lambda s: F_gamma(model, s, ratio) - target, *bracket,
                           xtol=1e-10, rtol=1e-14, maxiter=500)


# -- recovery penalty ------------------------------------------------------

def F_rho(r, ratio):
    """Leading-order normalized energy of the AT-1 profile under ``r``."""
    _ratio_ok(ratio)
    if not r >= 1.0:
        raise DomainError(f"r must be >= 1, got {r}")
    return 1.0 - 3.0 / (16.0 * r) * (ratio - 2.0) + 1.0 / (16.0 * r**1.5)


def F_rho_exact(r, ratio):
    """Same energy with the finite-domain exponential tail kept."""
    _ratio_ok(ratio)
    if not r > 0:
        raise DomainError(f"r must be > 0, got {r}")
    rr = math.sqrt(r)
    expo = 2.0 * math.sqrt(1.0 + 4.0 * r) - 2.0 * rr * ratio - 2.0
    return ((1.0 + 0.25 / r) ** 1.5 - 3.0 / (16.0 * r) * ratio + 1.0 / (16.0 * r**1.5)
            - 3.0 / (16.0 * r**1.5) * math.exp(expo))


def F_rho_quadrature(r, ratio, ell=1.0):
    """Quadrature of the penalized energy of the closed-form recovery profile."""
    L = ratio * ell
    xs = xhat_star(r, ell)
    layer = ell / math.sqrt(r)
    pts = sorted({p for p in (xs, xs + layer, xs + 5 * layer, xs + 20 * layer) if 0 < p < L})

    def integrand(x):
        xa = np.array([x])
        a = eval_rho_profile(xa, ell, L, r)[0]
        da = eval_rho_profile(xa, ell, L, r, 1)[0]
        v = min(0.0, a)
        return a / ell + ell * da * da + r / ell * v * v

    return 0.75 * _integrate_pieces(integrand, 0.0, L, pts)


def r_opt(tol_rec=DEFAULT_TOL_REC, ratio=200.0):
    """Recovery penalty from the balance with the r^(-3/2) term dropped."""
    _tol_ok(tol_rec)
    if not ratio > 2.0:
        raise DomainError(f"L/ell must exceed 2 for a recovery penalty, got {ratio}")
    return 3.0 / 16.0 * (ratio - 2.0) / tol_rec


def r_opt_cubic(tol_rec, ratio):
    """Diagnostic: root of ``F_rho(r) = 1 - tol`` keeping every term."""
    r0 = r_opt(tol_rec, ratio)
    f = lambda r: F_rho(r, ratio) - (1.0 - tol_rec)
    lo = max(1.0, 0.25 * r0)
    return optimize.brentq(f, lo, 4.0 * r0 + 10.0, xtol=1e-12, rtol=1e-14)


def rho_from_r(r, toughness, length_scale):
    return 0.75 * toughness / length_scale * r


def rho_opt(toughness, length_scale, half_length, tol_rec=DEFAULT_TOL_REC):
    """Physical recovery penalty (energy per volume)."""
    if not (toughness > 0 and length_scale > 0 and half_length > 0):
        raise DomainError("toughness, length scale and domain length must be positive")
    return rho_from_r(r_opt(tol_rec, half_length / length_scale), toughness, length_scale)


# -- slopes at the optimum -------------------------------------------------

def F_prime_diagnostics(case, tol, ratio=None):
    """Slope of ``F`` at the optimal penalty.

    ``case`` is a :class:`ModelKind` for the irreversibility penalty or the
    string ``"rho"`` for the recovery penalty (which also needs ``ratio``).
    """
    _tol_ok(tol)
    if case is ModelKind.AT1:
        return 8.0 / 9.0 * tol**3
    if case is ModelKind.AT2:
        return 0.5 * tol**3
    if case == "rho":
        if ratio is None or not ratio > 2.0:
            raise DomainError("the recovery slope needs L/ell > 2")
        return 16.0 * tol**2 / (3.0 * (ratio - 2.0))
    raise DomainError(f"unknown case {case!r}")


@dataclass(frozen=True)
class PenaltyBound:
    """A resolved penalty: dimensionless value, physical value and its inputs."""

    kind: str                      # "gamma" or "rho"
    model: ModelKind
    tol: float
    dimensionless: float
    physical: float
    ratio: float | None = None

    def __post_init__(self):
        _tol_ok(self.tol)
        if not (self.dimensionless > 0 and self.physical > 0):
            raise DomainError("penalty bounds must be strictly positive")

    @classmethod
    def for_gamma(cls, model, toughness, length_scale, tol=DEFAULT_TOL_IR):
        _tol_ok(tol)
        return cls("gamma", model, tol, s_opt(model, tol),
                   gamma_opt(model, toughness, length_scale, tol))

    @classmethod
    def for_rho(cls, toughness, length_scale, half_length, tol=DEFAULT_TOL_REC):
        ratio = half_length / length_scale
        return cls("rho", ModelKind.AT1, tol, r_opt(tol, ratio),
                   rho_opt(toughness, length_scale, half_length, tol), ratio)

    @property
    def slope(self):
        if self.kind == "rho":
            return F_prime_diagnostics("rho", self.tol, self.ratio)
        return F_prime_diagnostics(self.model, self.tol)
