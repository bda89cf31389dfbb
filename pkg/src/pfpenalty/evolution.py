"""Quasi-static incremental driver with the staggered (alternate minimization) scheme."""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from typing import Callable

import numpy as np

from .errors import ConfigurationError, ConvergenceError, DomainError
from .fem.assembly import (DofMap, Loads, NodalFields, assemble_displacement, assemble_phasefield,
                           assemble_recovery, energies, geometry, phasefield_energy, reaction_force, recovery_energy,
                           update_history)
from .fem.mesh import Mesh2D
from .fem.solve import newton
from .model import MaterialSpec, ModelConfig


@dataclass(frozen=True)
class SolverTolerances:
    """Stopping rules.

    ``res_stag_norm`` selects how the phase-field residual is made
    dimensionless: ``"lumped"`` divides each nodal entry by
    ``G_c / (c_w ell)`` times the lumped nodal area (a pointwise measure of
    the strong-form residual); ``"global"`` divides the whole vector by
    ``G_c / (c_w ell)`` times the domain area.  ``alpha_solver`` picks the
    linear solver of the phase-field Newton steps: Jacobi-preconditioned
    ``"cg"`` (the tangent is dominated by its mass-like terms) or ``"direct"``.

    ``anderson_depth > 0`` applies Anderson mixing with that many previous
    iterates to the staggered map ``alpha -> u(alpha) -> alpha``; 0 gives
    plain alternate minimization.  The stopping test is the same either way.
    """

    tol_stag: float = 1e-4
    tol_nr: float = 1e-6
    max_stag_iters: int = 2000
    max_nr_iters: int = 50
    res_stag_norm: str = "lumped"
    alpha_solver: str = "cg"
    anderson_depth: int = 5

    def __post_init__(self):
        if not (0 < self.tol_nr < self.tol_stag):
            raise ConfigurationError("tolerances must satisfy 0 < TOL_NR < TOL_Stag")
        if self.max_stag_iters < 1 or self.max_nr_iters < 1:
            raise ConfigurationError("iteration caps must be positive")
        if self.anderson_depth < 0:
            raise ConfigurationError("anderson_depth must be >= 0")
        if self.alpha_solver not in ("cg", "direct"):
            raise ConfigurationError(f"unknown phase-field solver {self.alpha_solver!r}")
        if self.res_stag_norm not in ("lumped", "global"):
            raise ConfigurationError(f"unknown residual norm {self.res_stag_norm!r}")


@dataclass(frozen=True)
class LoadStep:
    displacement: float = 0.0
    pressure: float = 0.0
    traction: dict | None = None


@dataclass
class LoadingSchedule:
    steps: list = field(default_factory=list)

    def __post_init__(self):
        self.steps = [s if isinstance(s, LoadStep) else LoadStep(float(s)) for s in self.steps]

    def __len__(self):
        return len(self.steps)

    def __iter__(self):
        return iter(self.steps)

    @classmethod
    def loading_unloading(cls, first=6e-3, increment=0.3e-3, n_loading=20, n_unloading=13,
                          unload_factor=3.0):
        """``u_1 = first``; ``n_loading`` increments up, then ``n_unloading`` of
        ``unload_factor * increment`` down."""
        vals = [first]
        for _ in range(n_loading):
            vals.append(vals[-1] + increment)
        for _ in range(n_unloading):
            vals.append(vals[-1] - unload_factor * increment)
        # round away the accumulated binary noise of the increments
        return cls([LoadStep(round(v, 12)) for v in vals])

    @classmethod
    def single_pressure(cls, pressure):
        return cls([LoadStep(pressure=pressure)])


@dataclass
class StepRecord:
    step: int
    load: float
    reaction: float
    elastic: float
    surface: float
    penalty: float
    max_violation: float
    stag_iters: int
    nr_alpha: int
    nr_u: int
    res_stag: float
    res_history: list = field(default_factory=list, repr=False)

    COLUMNS = ("step", "load", "reaction", "elastic", "surface", "penalty", "max_violation",
               "stag_iters", "nr_alpha", "nr_u", "res_stag")

    def row(self):
        return [getattr(self, c) for c in self.COLUMNS]


@dataclass
class Problem:
    """Everything that stays fixed over a run.

    ``u_values(step)`` returns the prescribed values of ``dofmap.u_fixed``;
    ``a_values`` those of ``dofmap.a_fixed``.
    """

    mesh: Mesh2D
    material: MaterialSpec
    config: ModelConfig
    dofmap: DofMap
    u_values: Callable = None
    a_values: np.ndarray | None = None
    reaction_label: str | None = None
    reaction_component: int = 0

    def __post_init__(self):
        if self.u_values is None:
            nfix = self.dofmap.u_fixed.size
            self.u_values = lambda step: np.zeros(nfix)
        if self.a_values is None:
            self.a_values = np.zeros(self.dofmap.a_fixed.size)
        geo = geometry(self.mesh)
        self.lumped = np.bincount(geo.tri.ravel(), weights=np.repeat(geo.area / 3.0, 3),
                                  minlength=self.mesh.n_nodes)
        self.area = float(geo.area.sum())

    def loads(self, step: LoadStep):
        return Loads(pressure=step.pressure, traction=step.traction or {})


class _Measures:
    def __init__(self, problem: Problem, tol: SolverTolerances):
        mat, cfg = problem.material, problem.config
        unit = mat.toughness / (cfg.model.c_w * mat.length_scale)
        free = problem.dofmap.a_free
        if tol.res_stag_norm == "lumped":
            self._a_scale = unit * problem.lumped[free]
        else:
            self._a_scale = np.full(free.size, unit * problem.area)

    def alpha(self, r_free):
        return float(np.max(np.abs(r_free) / self._a_scale)) if r_free.size else 0.0


def _u_measure(scale):
    def m(r_free):
        return float(np.max(np.abs(r_free)) / scale) if r_free.size else 0.0
    return m


def _u_scale(problem, fields, loads):
    """Force scale: largest reaction or applied nodal load at the current state."""
    res, _ = assemble_displacement(problem.mesh, fields, problem.material, problem.config,
                                   loads, tangent=False)
    s = float(np.max(np.abs(res[problem.dofmap.u_fixed]))) if problem.dofmap.u_fixed.size else 0.0
    if loads.pressure or loads.traction:
        zero = replace(fields, u=np.zeros_like(fields.u))
        ext, _ = assemble_displacement(problem.mesh, zero, problem.material, problem.config,
                                       loads, tangent=False)
        s = max(s, float(np.max(np.abs(ext))))
    return s


def solve_alpha(problem, fields, loads, tol, measure):
    """Phase-field sub-problem at fixed ``u``; returns (alpha, iterations)."""
    def fn(a, tangent):
        return assemble_phasefield(problem.mesh, replace(fields, alpha=a), problem.material,
                                   problem.config, loads, tangent)
    def en(a):
        return phasefield_energy(problem.mesh, replace(fields, alpha=a), problem.material,
                                 problem.config, loads)
    a, it, _ = newton(fn, fields.alpha, problem.dofmap.a_free, measure, tol.tol_nr,
                      tol.max_nr_iters, name="phase-field Newton", energy_fn=en,
                      linear_solver=tol.alpha_solver)
    return a, it


def solve_u(problem, fields, loads, tol):
    """Displacement sub-problem at fixed ``alpha``; returns (u, iterations)."""
    scale = _u_scale(problem, fields, loads)
    if scale == 0.0:
        return fields.u.copy(), 0
    shape = fields.u.shape

    def fn(u, tangent):
        return assemble_displacement(problem.mesh, replace(fields, u=u.reshape(shape)),
                                     problem.material, problem.config, loads, tangent)
    def en(u):
        return energies(problem.mesh, replace(fields, u=u.reshape(shape)), problem.material,
                        problem.config, loads)["total"]
    u, it, _ = newton(fn, fields.u.reshape(-1), problem.dofmap.u_free, _u_measure(scale),
                      tol.tol_nr, tol.max_nr_iters, name="displacement Newton", energy_fn=en)
    return u.reshape(shape), it


class _Anderson:
    """Anderson mixing for a fixed-point map ``x -> G(x)`` (type II, least squares).

    The history is dropped whenever ``|G(x) - x|`` grows, which falls back
    to the plain iteration until the map behaves again.
    """

    def __init__(self, depth):
        self.depth = depth
        self.xs, self.fs = [], []

    def update(self, x, gx):
        if self.depth == 0:
            return gx
        f = gx - x
        if self.fs and np.linalg.norm(f) > np.linalg.norm(self.fs[-1]):
            # restart: the mixed iterate made things worse
            self.xs, self.fs = [], []
        self.xs.append(x)
        self.fs.append(f)
        if len(self.xs) > self.depth + 1:
            self.xs.pop(0)
            self.fs.pop(0)
        if len(self.xs) < 2:
            return gx
        dX = np.diff(np.array(self.xs), axis=0).T
        dF = np.diff(np.array(self.fs), axis=0).T
        coef = np.linalg.lstsq(dF, f, rcond=1e-10)[0]
        return x + f - (dX + dF) @ coef


def staggered_step(problem: Problem, fields: NodalFields, step: LoadStep,
                   tol: SolverTolerances = SolverTolerances(), index: int = 0):
    """One loading step of alternate minimization.

    ``u^0`` is the displacement solve at the previous ``alpha`` with the new
    boundary values.  Each iteration ``k`` then solves
    the phase-field problem at ``u^{k-1}`` and then the displacement problem
    at ``alpha^k``, and stops once the scaled phase-field residual at
    ``(u^k, alpha^k)`` is below ``tol.tol_stag``.  In history mode ``H`` is
    refreshed from ``u^{k-1}`` before each phase-field solve.

    Returns ``(new_fields, record)``; the input ``fields`` are not modified.
    On failure :class:`ConvergenceError` carries the ``Res_Stag`` history.
    """
    cfg = problem.config
    dm = problem.dofmap
    f = fields.copy()
    loads = problem.loads(step)
    u = f.u.reshape(-1)
    u[dm.u_fixed] = problem.u_values(step)
    f.alpha[dm.a_fixed] = problem.a_values
    meas = _Measures(problem, tol)
    mixer = _Anderson(tol.anderson_depth)
    free = dm.a_free
    hist = []
    nra = nru = 0
    # elastic predictor: without it the new boundary values sit on a stale
    # interior and the first psi+ (and hence H) has a one-element jump
    f.u, nru = solve_u(problem, f, loads, tol)
    for k in range(1, tol.max_stag_iters + 1):
        if cfg.uses_history:
            f.H = update_history(problem.mesh, f, problem.material, cfg)
        x = f.alpha[free].copy()
        f.alpha, ia = solve_alpha(problem, f, loads, tol, meas.alpha)
        if k > 1:
            # u came from the current alpha only after the first iteration
            f.alpha[free] = mixer.update(x, f.alpha[free])
        f.u, iu = solve_u(problem, f, loads, tol)
        nra += ia
        nru += iu
        probe = f
        if cfg.uses_history:
            probe = replace(f, H=update_history(problem.mesh, f, problem.material, cfg))
        r, _ = assemble_phasefield(problem.mesh, probe, problem.material, cfg, loads, tangent=False)
        res = meas.alpha(r[dm.a_free])
        hist.append(res)
        if res <= tol.tol_stag:
            break
    else:
        raise ConvergenceError(f"staggered scheme did not converge in {tol.max_stag_iters} "
                               f"iterations at step {index} (Res_Stag {hist[-1]:.3e})",
                               history=hist, step=index)
    if cfg.uses_history:
        f.H = update_history(problem.mesh, f, problem.material, cfg)
    e = energies(problem.mesh, f, problem.material, cfg, loads)
    viol = float(np.max(np.maximum(0.0, f.alpha_prev - f.alpha))) if f.alpha.size else 0.0
    reac = (reaction_force(problem.mesh, f, problem.material, cfg, problem.reaction_label,
                           problem.reaction_component, loads)
            if problem.reaction_label else 0.0)
    load = step.pressure if step.pressure and not step.displacement else step.displacement
    rec = StepRecord(index, load, reac, e["elastic"], e["surface_reported"], e["penalty"], viol,
                     k, nra, nru, hist[-1], hist)
    return f, rec


def accept_step(fields: NodalFields):
    """Previous-step field for the next increment.

    Only the non-negative part is carried over: a negative phase field is
    never a physical state, and keeping it would let the AT1 constant
    source push the intact region down by ``1/(2s)`` every step.
    """
    f = fields.copy()
    f.alpha_prev = np.maximum(f.alpha, 0.0)
    return f


def run_evolution(schedule: LoadingSchedule, problem: Problem, fields: NodalFields | None = None,
                  tol: SolverTolerances = SolverTolerances(), recovery_rho=None,
                  callback=None):
    """Run every step of ``schedule`` and return ``(records, fields)``.

    When ``recovery_rho`` is not ``None`` the initial crack is first
    recovered into ``alpha = alpha_prev`` (it must be > 0 for AT1 and is
    ignored for AT2).  ``callback(record, fields)`` is called after each
    accepted step.
    """
    f = fields.copy() if fields is not None else NodalFields.zeros(problem.mesh)
    if recovery_rho is not None:
        a0, _ = recover_initial_crack(problem.mesh, problem.material, problem.config.model,
                                      recovery_rho)
        f.alpha = a0.copy()
        f.alpha_prev = a0.copy()
    records = []
    for n, step in enumerate(schedule, start=1):
        try:
            f, rec = staggered_step(problem, f, step, tol, index=n)
        except ConvergenceError as exc:
            exc.step = n
            raise
        f = accept_step(f)
        records.append(rec)
        if callback is not None:
            callback(rec, f)
    return records, f


def recover_initial_crack(mesh: Mesh2D, material: MaterialSpec, model, rho=0.0, tol=1e-10,
                          max_iter=50):
    """Phase field of the pre-existing crack: surface-energy minimizer with alpha = 1 on it.

    Returns ``(alpha0, E_S)`` where ``E_S`` includes the rho term for AT1.
    """
    crack = mesh.crack_nodes
    if crack.size == 0:
        raise ConfigurationError("mesh has no crack nodes to recover")
    n = mesh.n_nodes
    free = np.setdiff1d(np.arange(n), crack)
    a = np.zeros(n)
    a[crack] = 1.0
    geo = geometry(mesh)
    lumped = np.bincount(geo.tri.ravel(), weights=np.repeat(geo.area / 3.0, 3), minlength=n)
    unit = material.toughness / (model.c_w * material.length_scale)
    scale = unit * lumped[free]

    def fn(x, tangent):
        return assemble_recovery(mesh, x, material, model, rho, tangent)

    a, _, _ = newton(fn, a, free, lambda r: float(np.max(np.abs(r) / scale)), tol, max_iter,
                     name="recovery Newton",
                     energy_fn=lambda x: recovery_energy(mesh, x, material, model, rho))
    return a, recovery_energy(mesh, a, material, model, rho)


# -- closed-form references for the pressurized crack ------------------------

def critical_pressure(material: MaterialSpec, l0):
    """Griffith pressure ``sqrt(G_c E' / (pi l0))`` of a crack of half length ``l0``."""
    if not l0 > 0:
        raise DomainError("crack half length must be positive")
    return math.sqrt(material.toughness * material.plane_strain_modulus / (math.pi * l0))


def cod_analytic(x, pressure, l0, plane_strain_modulus):
    """Opening ``4 p l0 / E' * sqrt(1 - x^2/l0^2)``; zero outside the crack."""
    x = np.asarray(x, float)
    inside = np.abs(x) <= l0
    val = 4.0 * pressure * l0 / plane_strain_modulus * np.sqrt(np.clip(1.0 - (x / l0) ** 2, 0.0, None))
    out = np.where(inside, val, 0.0)
    return float(out) if out.ndim == 0 else out
