"""Discrete energy of the P1 phase-field model with its gradients and Hessians.

The discrete total energy per unit thickness is

    E(u, a) = sum_e A_e [ (g(a_c) + k) psi+(eps_e) + psi-(eps_e) ]
            + G_c / c_w * sum_e A_e [ mean_q w(a_q) / ell + ell |grad a_e|^2 ]
            + gamma / 2 * sum_e A_e mean_k <a_k - a_prev_k>_-^2
            + rho / 2   * sum_e A_e mean_k <a_k>_-^2
            + p * sum_e A_e u_c . grad a_e  -  traction work,

where ``a_c`` and ``u_c`` are centroid values.  The dissipation term uses
the three edge midpoints ``q``, which integrate quadratics exactly.  The two
Macaulay terms use the vertex rule by default (a lumped, diagonal penalty)
or the midpoint rule when ``penalty_quadrature = "midpoint"``.  The
lumped form keeps the discrete comparison principle, so all active nodes
stay on one side of the switching surface and semismooth Newton converges
without chattering at large penalties.

Every residual returned here is the exact gradient of this energy with
respect to the nodal unknowns and every tangent its exact (generalized)
Hessian.  In history-field mode the phase-field problem instead uses the
stored ``H`` in place of ``psi+``, which makes it the gradient of a
different, alpha-only functional.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace

import numpy as np
import scipy.sparse as sp

from ..errors import AssemblyError, ConfigurationError, MeshError
from ..model import (MaterialSpec, ModelConfig, ModelKind, degradation, degradation_prime,
                     dissipation, dissipation_prime, dissipation_prime2, heaviside_neg,
                     macaulay_neg, split_voigt)
from .mesh import Mesh2D

# value of each shape function at edge midpoint k (edge opposite node k)
PHI_MID = 0.5 * (1.0 - np.eye(3))
PHI_VERTEX = np.eye(3)


def _penalty_points(config):
    return PHI_VERTEX if config.penalty_quadrature == "vertex" else PHI_MID


# -- per-mesh precomputation -------------------------------------------------

class SparsePattern:
    """Maps element matrices of a fixed connectivity straight into CSR storage."""

    def __init__(self, elem_dofs, ndof):
        elem_dofs = np.asarray(elem_dofs, dtype=np.int64)
        k = elem_dofs.shape[1]
        self.ndof = ndof
        self.elem_dofs = elem_dofs
        rows = np.repeat(elem_dofs, k, axis=1).ravel()
        cols = np.tile(elem_dofs, (1, k)).ravel()
        keys, self._inverse = np.unique(rows * ndof + cols, return_inverse=True)
        self.indices = (keys % ndof).astype(np.int64)
        counts = np.bincount(keys // ndof, minlength=ndof)
        self.indptr = np.concatenate([[0], np.cumsum(counts)]).astype(np.int64)
        self.nnz = keys.size

    def matrix(self, local):
        data = np.bincount(self._inverse, weights=np.asarray(local).ravel(), minlength=self.nnz)
        return sp.csr_matrix((data, self.indices, self.indptr), shape=(self.ndof, self.ndof))

    def vector(self, local):
        return np.bincount(self.elem_dofs.ravel(), weights=np.asarray(local).ravel(),
                           minlength=self.ndof)


class Geometry:
    """Areas, shape-function gradients and strain-displacement matrices."""

    def __init__(self, mesh: Mesh2D):
        area = mesh.signed_areas()
        bad = np.flatnonzero(~(area > 0))
        if bad.size:
            raise AssemblyError(f"triangle {int(bad[0])} has zero or negative area {area[bad[0]]:.3e}")
        p = mesh.nodes[mesh.triangles]                         # (m, 3, 2)
        x, y = p[..., 0], p[..., 1]
        # gradient of the barycentric coordinate of node i
        b = np.stack([y[:, 1] - y[:, 2], y[:, 2] - y[:, 0], y[:, 0] - y[:, 1]], axis=1)
        c = np.stack([x[:, 2] - x[:, 1], x[:, 0] - x[:, 2], x[:, 1] - x[:, 0]], axis=1)
        self.area = area
        self.grads = np.stack([b, c], axis=2) / (2.0 * area)[:, None, None]   # (m, 3, 2)
        m = area.size
        B = np.zeros((m, 3, 6))
        B[:, 0, 0::2] = self.grads[:, :, 0]
        B[:, 1, 1::2] = self.grads[:, :, 1]
        B[:, 2, 0::2] = self.grads[:, :, 1]
        B[:, 2, 1::2] = self.grads[:, :, 0]
        self.B = B
        self.lap = np.einsum("mid,mjd->mij", self.grads, self.grads)          # (m, 3, 3)
        tri = mesh.triangles
        udofs = np.empty((m, 6), np.int64)
        udofs[:, 0::2] = 2 * tri
        udofs[:, 1::2] = 2 * tri + 1
        self.u_pattern = SparsePattern(udofs, 2 * mesh.n_nodes)
        self.a_pattern = SparsePattern(tri, mesh.n_nodes)
        self.tri = tri


def geometry(mesh: Mesh2D) -> Geometry:
    """Cached :class:`Geometry` of a mesh (the mesh must not be mutated afterwards)."""
    geo = getattr(mesh, "_geometry", None)
    if geo is None:
        geo = Geometry(mesh)
        mesh._geometry = geo
    return geo


# -- state containers --------------------------------------------------------

@dataclass
class DofMap:
    """Free/constrained split of the displacement and phase-field unknowns.

    Displacement dof ``2 i + d`` is component ``d`` of node ``i``.  The
    prescribed values live in :class:`NodalFields`; only the index sets are
    stored here.
    """

    n_nodes: int
    u_fixed: np.ndarray = field(default_factory=lambda: np.zeros(0, np.int64))
    a_fixed: np.ndarray = field(default_factory=lambda: np.zeros(0, np.int64))

    def __post_init__(self):
        self.u_fixed = np.unique(np.asarray(self.u_fixed, np.int64))
        self.a_fixed = np.unique(np.asarray(self.a_fixed, np.int64))
        if self.u_fixed.size and (self.u_fixed.min() < 0 or self.u_fixed.max() >= 2 * self.n_nodes):
            raise ConfigurationError("displacement constraint outside the dof range")
        if self.a_fixed.size and (self.a_fixed.min() < 0 or self.a_fixed.max() >= self.n_nodes):
            raise ConfigurationError("phase-field constraint outside the dof range")
        self.u_free = np.setdiff1d(np.arange(2 * self.n_nodes), self.u_fixed)
        self.a_free = np.setdiff1d(np.arange(self.n_nodes), self.a_fixed)

    @staticmethod
    def node_dofs(nodes, components=(0, 1)):
        nodes = np.asarray(nodes, np.int64)
        return np.concatenate([2 * nodes + c for c in components]) if nodes.size else nodes


@dataclass
class NodalFields:
    u: np.ndarray            # (n, 2)
    alpha: np.ndarray        # (n,)
    alpha_prev: np.ndarray   # (n,)
    H: np.ndarray            # (m,) history per element

    @classmethod
    def zeros(cls, mesh: Mesh2D):
        n, m = mesh.n_nodes, mesh.n_triangles
        return cls(np.zeros((n, 2)), np.zeros(n), np.zeros(n), np.zeros(m))

    def copy(self):
        return NodalFields(self.u.copy(), self.alpha.copy(), self.alpha_prev.copy(), self.H.copy())


@dataclass
class Loads:
    """Pressure on the phase-field crack faces and constant tractions per boundary label."""

    pressure: float = 0.0
    traction: dict = field(default_factory=dict)


@dataclass
class LinearSystem:
    matrix: sp.csr_matrix
    rhs: np.ndarray
    solution: np.ndarray | None = None


# -- local kernels -----------------------------------------------------------

def element_strains(mesh, u):
    geo = geometry(mesh)
    ue = np.asarray(u, float).reshape(-1)[geo.u_pattern.elem_dofs]
    return np.einsum("mij,mj->mi", geo.B, ue)


def _alpha_elem(mesh, alpha):
    return np.asarray(alpha, float)[geometry(mesh).tri]


def _deg(config, a_c):
    return degradation(a_c) + config.residual_stiffness


def tensile_energy(mesh, u, material: MaterialSpec, config: ModelConfig):
    """Element-wise psi+ of the current displacement."""
    eps = element_strains(mesh, u)
    return split_voigt(config.split, eps, material.lame_lambda, material.lame_mu, tangent=False)[0]


def _traction_vector(mesh, loads):
    f = np.zeros(2 * mesh.n_nodes)
    for label, t in (loads.traction or {}).items():
        edges, lengths = mesh.edge_lengths(label)
        if edges.size == 0:
            raise MeshError(f"no boundary edges labelled {label!r}")
        t = np.asarray(t, float)
        for d in (0, 1):
            w = 0.5 * lengths * t[d]
            f += np.bincount(2 * edges[:, 0] + d, weights=w, minlength=f.size)
            f += np.bincount(2 * edges[:, 1] + d, weights=w, minlength=f.size)
    return f


def assemble_displacement(mesh, fields: NodalFields, material: MaterialSpec,
                          config: ModelConfig, loads: Loads | None = None, tangent=True):
    """Gradient (and Hessian) of the discrete energy with respect to ``u``.

    Returns ``(residual, K)`` over all ``2 n`` dofs; ``K`` is ``None`` when
    ``tangent`` is false.  Constraint handling is left to the caller.
    """
    loads = loads or Loads()
    geo = geometry(mesh)
    eps = element_strains(mesh, fields.u)
    ae = _alpha_elem(mesh, fields.alpha)
    gk = _deg(config, ae.mean(axis=1))
    out = split_voigt(config.split, eps, material.lame_lambda, material.lame_mu, tangent=tangent)
    sig = gk[:, None] * out[2] + out[3]
    r_loc = geo.area[:, None] * np.einsum("mki,mk->mi", geo.B, sig)
    if loads.pressure:
        grad_a = np.einsum("mid,mi->md", geo.grads, ae)
        r_loc = r_loc + (loads.pressure * geo.area / 3.0)[:, None] * np.tile(grad_a, (1, 3))
    res = geo.u_pattern.vector(r_loc)
    if loads.traction:
        res = res - _traction_vector(mesh, loads)
    if not tangent:
        return res, None
    D = gk[:, None, None] * out[4] + out[5]
    K_loc = geo.area[:, None, None] * (geo.B.transpose(0, 2, 1) @ (D @ geo.B))
    return res, geo.u_pattern.matrix(K_loc)


def _weighted_gram(P, d):
    """``P^T diag(d_m) P`` for every element ``m`` (batched matmul beats einsum here)."""
    return (P.T[None] * d[:, None, :]) @ P


def _phase_terms(mesh, alpha, alpha_prev, material, config, psi, pressure, u, tangent):
    geo = geometry(mesh)
    kind = config.model
    ell = material.length_scale
    gc = material.toughness / kind.c_w
    A = geo.area
    ae = _alpha_elem(mesh, alpha)
    aq = ae @ PHI_MID.T                                     # midpoint values (m, 3)
    ac = ae.mean(axis=1)
    r = (A * degradation_prime(ac) * psi / 3.0)[:, None] * np.ones((1, 3))
    r += gc * (A / (3.0 * ell))[:, None] * (dissipation_prime(kind, aq) @ PHI_MID)
    r += gc * 2.0 * ell * A[:, None] * np.einsum("mij,mj->mi", geo.lap, ae)
    gam = config.gamma
    Q = _penalty_points(config)
    ak = ae @ Q.T
    if gam:
        ap = _alpha_elem(mesh, alpha_prev) @ Q.T
        r += gam * (A / 3.0)[:, None] * (macaulay_neg(ak - ap) @ Q)
    if config.rho:
        r += config.rho * (A / 3.0)[:, None] * (macaulay_neg(ak) @ Q)
    if pressure:
        uc = np.asarray(u, float)[geo.tri].mean(axis=1)      # (m, 2)
        r += pressure * A[:, None] * np.einsum("mid,md->mi", geo.grads, uc)
    res = geo.a_pattern.vector(r)
    if not tangent:
        return res, None
    K = (A * 2.0 * psi / 9.0)[:, None, None] * np.ones((1, 3, 3))
    K += gc * 2.0 * ell * A[:, None, None] * geo.lap
    diag = gc / (3.0 * ell) * dissipation_prime2(kind, aq)
    if np.any(diag):
        K += A[:, None, None] * _weighted_gram(PHI_MID, diag)
    pdiag = np.zeros_like(ak)
    if gam:
        pdiag += gam / 3.0 * heaviside_neg(ak - ap)
    if config.rho:
        pdiag += config.rho / 3.0 * heaviside_neg(ak)
    if np.any(pdiag):
        K += A[:, None, None] * _weighted_gram(Q, pdiag)
    return res, geo.a_pattern.matrix(K)


def phase_driving_energy(mesh, fields, material, config):
    """Per-element psi+ used by the phase-field problem (``H`` in history mode)."""
    if config.uses_history:
        return fields.H
    return tensile_energy(mesh, fields.u, material, config)


def assemble_phasefield(mesh, fields: NodalFields, material: MaterialSpec,
                        config: ModelConfig, loads: Loads | None = None, tangent=True):
    """Gradient (and Hessian) of the phase-field problem with respect to ``alpha``."""
    loads = loads or Loads()
    psi = phase_driving_energy(mesh, fields, material, config)
    return _phase_terms(mesh, fields.alpha, fields.alpha_prev, material, config, psi,
                        loads.pressure, fields.u, tangent)


def phasefield_energy(mesh, fields: NodalFields, material: MaterialSpec, config: ModelConfig,
                      loads: Loads | None = None):
    """Functional of ``alpha`` whose gradient is :func:`assemble_phasefield`.

    Terms independent of ``alpha`` (the compressive energy, tractions) are left out.
    """
    loads = loads or Loads()
    psi = phase_driving_energy(mesh, fields, material, config)
    A = geometry(mesh).area
    ac = _alpha_elem(mesh, fields.alpha).mean(axis=1)
    e = energies(mesh, replace(fields, u=fields.u if loads.pressure else np.zeros_like(fields.u)),
                 material, config, loads)
    return float(np.sum(A * degradation(ac) * psi)) + e["surface"] + e["penalty"] + \
        e["recovery"] + e["pressure"]


def recovery_config(model: ModelKind, rho, penalty_quadrature="vertex"):
    """Configuration of the crack-recovery problem (no elasticity, no irreversibility)."""
    if model is ModelKind.AT1 and not (rho and rho > 0):
        raise ConfigurationError("recovering an AT1 profile needs a recovery penalty rho > 0")
    from ..model import HistoryField
    return ModelConfig(model, irreversibility=HistoryField(),
                       rho=float(rho) if model is ModelKind.AT1 else 0.0,
                       penalty_quadrature=penalty_quadrature)


def assemble_recovery(mesh, alpha, material: MaterialSpec, model: ModelKind, rho=0.0, tangent=True):
    """Gradient and Hessian of the pure surface energy (plus the rho term for AT1)."""
    if mesh.crack_nodes.size == 0:
        raise ConfigurationError("recovery needs crack nodes")
    cfg = recovery_config(model, rho)
    zero = np.zeros(mesh.n_triangles)
    return _phase_terms(mesh, alpha, alpha, material, cfg, zero, 0.0, None, tangent)


def update_history(mesh, fields: NodalFields, material: MaterialSpec, config: ModelConfig):
    """``H <- max(H, psi+(u))`` per element; returns the new array."""
    return np.maximum(fields.H, tensile_energy(mesh, fields.u, material, config))


# -- energies and derived outputs -------------------------------------------

def energies(mesh, fields: NodalFields, material: MaterialSpec, config: ModelConfig,
             loads: Loads | None = None):
    """Elementwise-quadrature energy parts.

    Keys: ``elastic``, ``surface`` (E_S), ``penalty`` (gamma term),
    ``recovery`` (rho term), ``pressure``, ``traction_work``,
    ``surface_reported`` (E_S + penalty in penalty mode, E_S otherwise) and
    ``total``.
    """
    loads = loads or Loads()
    geo = geometry(mesh)
    A = geo.area
    kind = config.model
    ell = material.length_scale
    eps = element_strains(mesh, fields.u)
    pp, pm = split_voigt(config.split, eps, material.lame_lambda, material.lame_mu, tangent=False)[:2]
    ae = _alpha_elem(mesh, fields.alpha)
    aq = ae @ PHI_MID.T
    e_el = float(np.sum(A * (_deg(config, ae.mean(axis=1)) * pp + pm)))
    grad_a = np.einsum("mid,mi->md", geo.grads, ae)
    e_s = material.toughness / kind.c_w * float(np.sum(
        A * (dissipation(kind, aq).mean(axis=1) / ell + ell * (grad_a**2).sum(axis=1))))
    Q = _penalty_points(config)
    ak = ae @ Q.T
    pen = 0.0
    if config.gamma:
        ap = _alpha_elem(mesh, fields.alpha_prev) @ Q.T
        pen = 0.5 * config.gamma * float(np.sum(A * (macaulay_neg(ak - ap) ** 2).mean(axis=1)))
    rec = 0.5 * config.rho * float(np.sum(A * (macaulay_neg(ak) ** 2).mean(axis=1))) if config.rho else 0.0
    pres = 0.0
    if loads.pressure:
        uc = fields.u[geo.tri].mean(axis=1)
        pres = loads.pressure * float(np.sum(A * (uc * grad_a).sum(axis=1)))
    work = float(_traction_vector(mesh, loads) @ fields.u.reshape(-1)) if loads.traction else 0.0
    reported = e_s + pen if config.gamma else e_s
    return {"elastic": e_el, "surface": e_s, "penalty": pen, "recovery": rec, "pressure": pres,
            "traction_work": work, "surface_reported": reported,
            "total": e_el + e_s + pen + rec + pres - work}


def recovery_energy(mesh, alpha, material, model, rho=0.0):
    """Minimized recovery functional: E_S plus the rho term for AT1."""
    cfg = recovery_config(model, rho)
    f = NodalFields(np.zeros((mesh.n_nodes, 2)), np.asarray(alpha, float), np.asarray(alpha, float),
                    np.zeros(mesh.n_triangles))
    e = energies(mesh, f, material, cfg)
    return e["surface"] + e["recovery"]


def reaction_force(mesh, fields, material, config, boundary_label, component=0, loads=None):
    """Sum of the displacement residual over one component of a labelled boundary."""
    nodes = mesh.boundary_nodes(boundary_label)
    if nodes.size == 0:
        raise MeshError(f"no nodes on boundary {boundary_label!r}")
    res, _ = assemble_displacement(mesh, fields, material, config, loads, tangent=False)
    return float(res[2 * nodes + component].sum())


def cod_profile(mesh, fields, stations):
    """``-int u . grad(alpha) dy`` along vertical lines ``x = station``.

    Each triangle cut by the line contributes the exact integral of its
    linear ``u`` against its constant gradient.  A line running along an
    element edge is shared by the two neighbours, which get half weight.
    """
    geo = geometry(mesh)
    p = mesh.nodes[geo.tri]
    (xmin, _), (xmax, _) = mesh.bounding_box()
    ue = fields.u[geo.tri]                                  # (m, 3, 2)
    grad_a = np.einsum("mid,mi->md", geo.grads, fields.alpha[geo.tri])
    pairs = ((0, 1), (1, 2), (2, 0))
    out = []
    for xs in np.atleast_1d(np.asarray(stations, float)):
        if xs < xmin - 1e-12 or xs > xmax + 1e-12:
            raise MeshError(f"station x={xs} lies outside the domain")
        d = p[:, :, 0] - xs
        scale = max(1.0, abs(xs)) * 1e-12
        on = np.abs(d) <= scale
        hit = (d.min(axis=1) <= scale) & (d.max(axis=1) >= -scale)
        total = 0.0
        for e in np.flatnonzero(hit):
            pts, vals = [], []
            for i, j in pairs:
                if on[e, i]:
                    pts.append(p[e, i, 1])
                    vals.append(ue[e, i])
                elif not on[e, j] and d[e, i] * d[e, j] < 0:
                    t = d[e, i] / (d[e, i] - d[e, j])
                    pts.append(p[e, i, 1] + t * (p[e, j, 1] - p[e, i, 1]))
                    vals.append(ue[e, i] + t * (ue[e, j] - ue[e, i]))
            if len(pts) < 2:
                continue
            k_lo, k_hi = int(np.argmin(pts)), int(np.argmax(pts))
            length = pts[k_hi] - pts[k_lo]
            if length <= 0:
                continue
            weight = 0.5 if on[e].sum() == 2 else 1.0
            umid = 0.5 * (vals[k_lo] + vals[k_hi])
            total += weight * length * float(umid @ grad_a[e])
        out.append((float(xs), -total))
    return out
