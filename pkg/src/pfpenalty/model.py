"""Material data and the local ingredients of the regularized energy.

Everything here is a pure function of its arguments.  Strains are handled in
two layouts: as symmetric ``(..., 2, 2)`` tensors for the public
:func:`strain_energy_split`, and in engineering Voigt form
``[e_xx, e_yy, 2 e_xy]`` for the vectorized finite element kernels.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass

import numpy as np


class ModelKind(enum.Enum):
    """Local dissipation w(alpha); the normalization constant is bound to it."""

    AT1 = "AT1"
    AT2 = "AT2"

    @property
    def c_w(self) -> float:
        return 8.0 / 3.0 if self is ModelKind.AT1 else 2.0


class SplitKind(enum.Enum):
    NO_SPLIT = "NoSplit"
    VOL_DEV = "VolDev"
    SPECTRAL = "Spectral"


@dataclass(frozen=True)
class MaterialSpec:
    """Isotropic linear elastic solid with fracture toughness and length scale."""

    young_modulus: float
    poisson_ratio: float
    toughness: float
    length_scale: float

    def __post_init__(self):
        if not self.young_modulus > 0:
            raise ValueError(f"young_modulus must be > 0, got {self.young_modulus}")
        if not -1.0 < self.poisson_ratio < 0.5:
            raise ValueError(f"poisson_ratio must lie in (-1, 0.5), got {self.poisson_ratio}")
        if not self.toughness > 0:
            raise ValueError(f"toughness must be > 0, got {self.toughness}")
        if not self.length_scale > 0:
            raise ValueError(f"length_scale must be > 0, got {self.length_scale}")

    @property
    def lame_lambda(self) -> float:
        E, nu = self.young_modulus, self.poisson_ratio
        return E * nu / ((1.0 + nu) * (1.0 - 2.0 * nu))

    @property
    def lame_mu(self) -> float:
        return self.young_modulus / (2.0 * (1.0 + self.poisson_ratio))

    @property
    def plane_strain_modulus(self) -> float:
        """E' = E / (1 - nu^2)."""
        return self.young_modulus / (1.0 - self.poisson_ratio**2)

    @property
    def bulk_modulus_2d(self) -> float:
        """Plane-strain bulk modulus lambda + mu used by the vol-dev split."""
        return self.lame_lambda + self.lame_mu


# -- degradation and dissipation -------------------------------------------

def degradation(alpha):
    return (1.0 - np.asarray(alpha, dtype=float)) ** 2


def degradation_prime(alpha):
    return -2.0 * (1.0 - np.asarray(alpha, dtype=float))


def degradation_prime2(alpha):
    return np.full_like(np.asarray(alpha, dtype=float), 2.0)


def dissipation(kind: ModelKind, alpha):
    a = np.asarray(alpha, dtype=float)
    return a.copy() if kind is ModelKind.AT1 else a * a


def dissipation_prime(kind: ModelKind, alpha):
    a = np.asarray(alpha, dtype=float)
    return np.ones_like(a) if kind is ModelKind.AT1 else 2.0 * a


def dissipation_prime2(kind: ModelKind, alpha):
    a = np.asarray(alpha, dtype=float)
    return np.zeros_like(a) if kind is ModelKind.AT1 else np.full_like(a, 2.0)


# -- Macaulay bracket and its derivative -----------------------------------

def macaulay_neg(y):
    """Negative part min(0, y)."""
    return np.minimum(0.0, y)


def heaviside_neg(y):
    """Derivative of :func:`macaulay_neg`; equals 1 for y <= 0 (including 0)."""
    return np.where(np.asarray(y) <= 0.0, 1.0, 0.0)


def _macaulay_pos(y):
    return np.maximum(0.0, y)


# -- strain energy and its tension/compression split -----------------------

_M = np.array([1.0, 1.0, 0.0])          # Voigt identity
_IS = np.diag([1.0, 1.0, 0.5])          # symmetric identity, engineering shear


def elastic_energy(eps, material: MaterialSpec):
    """Full density 0.5*lambda*tr^2 + mu*tr(eps.eps) for (..., 2, 2) strains."""
    eps = np.asarray(eps, dtype=float)
    tr = eps[..., 0, 0] + eps[..., 1, 1]
    return 0.5 * material.lame_lambda * tr**2 + material.lame_mu * np.einsum("...ij,...ij->...", eps, eps)


def split_voigt(kind: SplitKind, eps_v, lam: float, mu: float, tangent: bool = True):
    """Vectorized split for Voigt strains of shape (n, 3).

    Returns ``psi_p, psi_m, sig_p, sig_m`` and, when ``tangent`` is set,
    ``D_p, D_m`` of shape (n, 3, 3) mapping engineering strain increments to
    stress increments.  At kinks the tensile branch takes the tie, so that
    ``D_p + D_m`` always equals the elastic tangent.
    """
    eps_v = np.atleast_2d(np.asarray(eps_v, dtype=float))
    n = eps_v.shape[0]
    exx, eyy, gxy = eps_v[:, 0], eps_v[:, 1], eps_v[:, 2]
    exy = 0.5 * gxy
    tr = exx + eyy
    D_full = lam * np.outer(_M, _M) + 2.0 * mu * _IS

    if kind is SplitKind.NO_SPLIT:
        sig = np.stack([lam * tr + 2 * mu * exx, lam * tr + 2 * mu * eyy, 2 * mu * exy], axis=1)
        psi = 0.5 * lam * tr**2 + mu * (exx**2 + eyy**2 + 2 * exy**2)
        out = [psi, np.zeros(n), sig, np.zeros((n, 3))]
        if tangent:
            out += [np.broadcast_to(D_full, (n, 3, 3)).copy(), np.zeros((n, 3, 3))]
        return tuple(out)

    if kind is SplitKind.VOL_DEV:
        K = lam + mu
        trp, trm = _macaulay_pos(tr), macaulay_neg(tr)
        dxx, dyy = exx - 0.5 * tr, eyy - 0.5 * tr
        dev_sq = dxx**2 + dyy**2 + 2 * exy**2
        psi_p = 0.5 * K * trp**2 + mu * dev_sq
        psi_m = 0.5 * K * trm**2
        sig_p = np.stack([K * trp + 2 * mu * dxx, K * trp + 2 * mu * dyy, 2 * mu * exy], axis=1)
        sig_m = np.stack([K * trm, K * trm, np.zeros(n)], axis=1)
        out = [psi_p, psi_m, sig_p, sig_m]
        if tangent:
            hp = (tr >= 0.0).astype(float)
            mm = np.outer(_M, _M)
            dev = 2 * mu * (_IS - 0.5 * mm)
            D_p = hp[:, None, None] * (K * mm) + dev
            D_m = (1.0 - hp)[:, None, None] * (K * mm)
            out += [D_p, D_m]
        return tuple(out)

    if kind is SplitKind.SPECTRAL:
        mean = 0.5 * tr
        rad = np.sqrt((0.5 * (exx - eyy)) ** 2 + exy**2)
        e1, e2 = mean + rad, mean - rad
        # eigenprojections in Voigt layout [P_xx, P_yy, P_xy]
        distinct = rad > 0.0
        safe = np.where(distinct, 2.0 * rad, 1.0)
        p1 = np.empty((n, 3))
        p1[:, 0] = np.where(distinct, (exx - e2) / safe, 1.0)
        p1[:, 1] = np.where(distinct, (eyy - e2) / safe, 0.0)
        p1[:, 2] = np.where(distinct, exy / safe, 0.0)
        p2 = _M[None, :] - p1
        trp, trm = _macaulay_pos(tr), macaulay_neg(tr)
        e1p, e2p = _macaulay_pos(e1), _macaulay_pos(e2)
        e1m, e2m = macaulay_neg(e1), macaulay_neg(e2)
        psi_p = 0.5 * lam * trp**2 + mu * (e1p**2 + e2p**2)
        psi_m = 0.5 * lam * trm**2 + mu * (e1m**2 + e2m**2)
        sig_p = lam * trp[:, None] * _M + 2 * mu * (e1p[:, None] * p1 + e2p[:, None] * p2)
        sig_m = lam * trm[:, None] * _M + 2 * mu * (e1m[:, None] * p1 + e2m[:, None] * p2)
        out = [psi_p, psi_m, sig_p, sig_m]
        if tangent:
            h1 = (e1 >= 0.0).astype(float)
            h2 = (e2 >= 0.0).astype(float)
            # divided difference of <.>_+ between the eigenvalues; it is exact
            # for the piecewise-linear bracket and tends to the step at e1 == e2
            straddle = (e1 >= 0.0) & (e2 < 0.0)
            theta = np.where(straddle, e1 / np.where(distinct, e1 - e2, 1.0), h1 * h2)
            theta = np.where(distinct, theta, h1)
            P11 = np.einsum("ni,nj->nij", p1, p1)
            P22 = np.einsum("ni,nj->nij", p2, p2)
            shear = _IS[None] - P11 - P22
            htr = (tr >= 0.0).astype(float)
            mm = np.outer(_M, _M)
            D_p = (lam * htr)[:, None, None] * mm + 2 * mu * (
                h1[:, None, None] * P11 + h2[:, None, None] * P22 + theta[:, None, None] * shear)
            D_m = (lam * (1 - htr))[:, None, None] * mm + 2 * mu * (
                (1 - h1)[:, None, None] * P11 + (1 - h2)[:, None, None] * P22
                + (1 - theta)[:, None, None] * shear)
            out += [D_p, D_m]
        return tuple(out)

    raise ValueError(f"unknown split kind {kind!r}")


def tensor_to_voigt(eps):
    eps = np.asarray(eps, dtype=float)
    return np.stack([eps[..., 0, 0], eps[..., 1, 1], eps[..., 0, 1] + eps[..., 1, 0]], axis=-1)


def voigt_stress_to_tensor(sig_v):
    sig_v = np.asarray(sig_v)
    out = np.empty(sig_v.shape[:-1] + (2, 2))
    out[..., 0, 0] = sig_v[..., 0]
    out[..., 1, 1] = sig_v[..., 1]
    out[..., 0, 1] = out[..., 1, 0] = sig_v[..., 2]
    return out


def strain_energy_split(kind: SplitKind, eps, material: MaterialSpec):
    """Split the strain energy density of symmetric 2x2 strain(s).

    Parameters
    ----------
    kind : SplitKind
    eps : array_like, shape (..., 2, 2)
        Symmetric infinitesimal strain.
    material : MaterialSpec

    Returns
    -------
    psi_plus, psi_minus : ndarray, shape (...)
    sigma_plus, sigma_minus : ndarray, shape (..., 2, 2)
        Derivatives of the two energy parts with respect to the strain.
    """
    eps = np.asarray(eps, dtype=float)
    lead = eps.shape[:-2]
    ev = tensor_to_voigt(eps).reshape(-1, 3)
    psi_p, psi_m, sig_p, sig_m = split_voigt(kind, ev, material.lame_lambda, material.lame_mu,
                                             tangent=False)
    return (psi_p.reshape(lead), psi_m.reshape(lead),
            voigt_stress_to_tensor(sig_p).reshape(lead + (2, 2)),
            voigt_stress_to_tensor(sig_m).reshape(lead + (2, 2)))


# -- run-level model configuration -----------------------------------------

@dataclass(frozen=True)
class PenaltyGamma:
    """Irreversibility by the penalty ``gamma/2 * int <alpha - alpha_prev>_-^2``."""

    gamma: float

    def __post_init__(self):
        if not self.gamma > 0:
            raise ValueError(f"gamma must be > 0, got {self.gamma}")


@dataclass(frozen=True)
class HistoryField:
    """Irreversibility by driving the phase field with the running maximum of psi+."""


IrreversibilityMode = (PenaltyGamma, HistoryField)


@dataclass(frozen=True)
class ModelConfig:
    """Model kind, split and irreversibility treatment of one simulation.

    ``rho`` is the penalty on ``<alpha>_-`` added to the phase-field problem;
    it is required for AT1 with a history field, where nothing else keeps the
    phase field non-negative.  ``residual_stiffness`` is added to the
    degradation of the tensile energy so fully broken elements keep a
    positive definite displacement tangent.  ``penalty_quadrature`` picks
    the integration points of the two Macaulay penalty terms.
    """

    model: ModelKind
    split: SplitKind = SplitKind.NO_SPLIT
    irreversibility: object = HistoryField()
    rho: float = 0.0
    residual_stiffness: float = 1e-8
    penalty_quadrature: str = "vertex"

    def __post_init__(self):
        if not isinstance(self.irreversibility, IrreversibilityMode):
            raise ValueError("irreversibility must be PenaltyGamma or HistoryField")
        if self.rho < 0:
            raise ValueError("rho must be >= 0")
        if self.penalty_quadrature not in ("vertex", "midpoint"):
            raise ValueError("penalty_quadrature must be 'vertex' or 'midpoint'")
        if not 0.0 <= self.residual_stiffness < 1.0:
            raise ValueError("residual_stiffness must lie in [0, 1)")

    @property
    def gamma(self) -> float:
        irr = self.irreversibility
        return irr.gamma if isinstance(irr, PenaltyGamma) else 0.0

    @property
    def uses_history(self) -> bool:
        return isinstance(self.irreversibility, HistoryField)
