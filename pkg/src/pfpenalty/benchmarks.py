"""Ready-made setups for the shear test on a notched square and the pressurized crack.

Units of the shear presets are mm and kN, so moduli are in kN/mm^2 and the
toughness in kN/mm; reactions are kN per mm of thickness.  The pressurized
crack uses dimensionless data.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace

import numpy as np

from .errors import ConfigurationError
from .evolution import (LoadingSchedule, Problem, SolverTolerances, cod_analytic,
                        recover_initial_crack, run_evolution)
from .fem.assembly import DofMap, NodalFields, cod_profile
from .fem.mesh import Mesh2D, generate_rect_mesh, generate_sen_mesh
from .model import (HistoryField, MaterialSpec, ModelConfig, ModelKind, PenaltyGamma,
                    SplitKind)
from .tuning import DEFAULT_TOL_IR, DEFAULT_TOL_REC, gamma_opt, rho_opt

SEN_NOTCH_ASSUMPTION = ("notch along y = a from the left edge x = 0 to the centre (a, a); "
                        "bottom edge clamped, top edge u_x = load, u_y = 0")


@dataclass(frozen=True)
class SenPreset:
    """Shear test geometry, material and mesh resolution."""

    half_width: float = 1.0              # a [mm]
    young_modulus: float = 210.0         # [kN/mm^2]
    poisson_ratio: float = 0.3
    toughness: float = 2.7e-3            # [kN/mm]
    length_scale: float = 0.01           # [mm]
    h_fine: float = 0.0025
    h_coarse: float = 0.1
    fine_region: tuple | None = None
    intact_edges: tuple = ("top",)       # boundary labels held at alpha = 0
    load_scale: float = 1.0              # multiplies every displacement of the schedule

    @property
    def material(self):
        return MaterialSpec(self.young_modulus, self.poisson_ratio, self.toughness,
                            self.length_scale)

    def mesh(self):
        return generate_sen_mesh(self.half_width, self.h_fine, self.h_coarse, self.fine_region)

    def schedule(self):
        """``u_1 = 6e-3`` mm, 20 increments of 0.3e-3 up, 13 of 0.9e-3 down, all times ``load_scale``."""
        k = self.load_scale
        return LoadingSchedule.loading_unloading(6e-3 * k, 0.3e-3 * k)


SEN_FULL = SenPreset()
# Larger length scale with the same h_fine/ell.  The crack then starts near
# 0.0126 mm, beyond the unscaled peak of 0.012 mm; the doubled ramp lets it
# reach the boundary (near 0.019 mm) before unloading.
# h_coarse = ell/2 keeps the surface energy resolved on the whole domain.
SEN_DESK = SenPreset(length_scale=0.04, h_fine=0.01, h_coarse=0.02, load_scale=2.0)


@dataclass(frozen=True)
class SneddonPreset:
    half_width: float = 2.0
    half_height: float = 2.0
    crack_half_length: float = 0.2
    young_modulus: float = 1.0
    poisson_ratio: float = 0.2
    toughness: float = 1.0
    length_scale: float = 0.02
    pressure: float = 0.1
    h_fine: float = 0.0025
    h_coarse: float = 0.25
    h_crack: float | None = 2e-4
    band: float | None = None

    @property
    def material(self):
        return MaterialSpec(self.young_modulus, self.poisson_ratio, self.toughness,
                            self.length_scale)

    def mesh(self):
        return generate_rect_mesh(self.half_width, self.half_height, self.crack_half_length,
                                  self.h_fine, self.h_coarse, band=self.band,
                                  ell=self.length_scale, h_crack=self.h_crack)

    def stations(self, n=41):
        l0 = self.crack_half_length
        return np.linspace(-1.25 * l0, 1.25 * l0, n)


SNEDDON_FULL = SneddonPreset()


def resolve_irreversibility(mode, model: ModelKind, material: MaterialSpec, tol_ir=DEFAULT_TOL_IR):
    """``"auto"`` becomes the optimal penalty; ``"history"`` the history field;
    a number is taken as a physical penalty; a ``PenaltyGamma`` or
    ``HistoryField`` is passed through."""
    if isinstance(mode, (PenaltyGamma, HistoryField)):
        return mode
    if isinstance(mode, str):
        key = mode.strip().lower()
        if key == "auto":
            return PenaltyGamma(gamma_opt(model, material.toughness, material.length_scale, tol_ir))
        if key == "history":
            return HistoryField()
        try:
            mode = float(key)
        except ValueError:
            raise ConfigurationError(f"unknown irreversibility setting {mode!r}") from None
    return PenaltyGamma(float(mode))


def sen_problem(mesh: Mesh2D, material: MaterialSpec, config: ModelConfig,
                intact_edges=("top",)):
    """Clamped bottom, top edge sheared horizontally with u_y held at zero.

    Nodes on ``intact_edges`` keep ``alpha = 0``.  On the driven edge this
    stops a spurious crack from the corner where it meets the free left edge
    running along the boundary, where it would cost only half the surface
    energy.
    """
    bottom = mesh.boundary_nodes("bottom")
    top = mesh.boundary_nodes("top")
    if bottom.size == 0 or top.size == 0:
        raise ConfigurationError("mesh needs 'bottom' and 'top' boundary labels")
    fixed = np.concatenate([DofMap.node_dofs(bottom), DofMap.node_dofs(top)])
    intact = [mesh.boundary_nodes(lbl) for lbl in intact_edges]
    dm = DofMap(mesh.n_nodes, fixed, np.concatenate(intact) if intact else np.zeros(0, np.int64))
    driven = np.isin(dm.u_fixed, 2 * top)

    def u_values(step):
        return np.where(driven, step.displacement, 0.0)

    return Problem(mesh, material, config, dm, u_values, reaction_label="top",
                   reaction_component=0)


def run_sen(preset: SenPreset = SEN_DESK, model=ModelKind.AT1, split=SplitKind.VOL_DEV,
            irreversibility="auto", schedule: LoadingSchedule | None = None,
            tol: SolverTolerances = SolverTolerances(), mesh: Mesh2D | None = None,
            callback=None, tol_ir=DEFAULT_TOL_IR):
    """Loading-unloading shear run; returns ``(records, fields, problem)``."""
    material = preset.material
    mode = resolve_irreversibility(irreversibility, model, material, tol_ir)
    config = ModelConfig(model, split, mode)
    problem = sen_problem(mesh if mesh is not None else preset.mesh(), material, config,
                          preset.intact_edges)
    schedule = schedule if schedule is not None else preset.schedule()
    records, fields = run_evolution(schedule, problem, tol=tol, callback=callback)
    return records, fields, problem


@dataclass
class SneddonResult:
    records: list
    fields: NodalFields
    problem: Problem
    alpha0: np.ndarray
    recovery_energy: float
    cod: np.ndarray = field(repr=False)        # rows (x, COD_PF, COD exact)


def sneddon_problem(mesh: Mesh2D, material: MaterialSpec, config: ModelConfig):
    """Displacement held at zero on the whole outer boundary."""
    outer = np.unique(mesh.boundary_edges[mesh.boundary_labels != "crack"].ravel())
    return Problem(mesh, material, config, DofMap(mesh.n_nodes, DofMap.node_dofs(outer)))


def run_sneddon(preset: SneddonPreset = SNEDDON_FULL, model=ModelKind.AT2,
                split=SplitKind.VOL_DEV, irreversibility="auto", recovery="auto",
                tol: SolverTolerances = SolverTolerances(), mesh: Mesh2D | None = None,
                stations=None, tol_ir=DEFAULT_TOL_IR, tol_rec=DEFAULT_TOL_REC):
    """Recover the initial crack, apply one pressure step and sample the opening.

    ``recovery`` is the physical lower-bound penalty for the linear model;
    ``"auto"`` uses the optimal value with the largest domain edge as length.
    The quadratic model needs none and ignores it.
    """
    material = preset.material
    mesh = mesh if mesh is not None else preset.mesh()
    rho = 0.0
    if model is ModelKind.AT1:
        if isinstance(recovery, str) and recovery.strip().lower() == "auto":
            (x0, y0), (x1, y1) = mesh.bounding_box()
            rho = rho_opt(material.toughness, material.length_scale, max(x1 - x0, y1 - y0),
                          tol_rec)
        else:
            rho = float(recovery)
    mode = resolve_irreversibility(irreversibility, model, material, tol_ir)
    alpha0, e_s = recover_initial_crack(mesh, material, model, rho)
    config = ModelConfig(model, split, mode, rho=rho)
    problem = sneddon_problem(mesh, material, config)
    fields = NodalFields.zeros(mesh)
    fields = replace(fields, alpha=alpha0.copy(), alpha_prev=alpha0.copy())
    schedule = LoadingSchedule.single_pressure(preset.pressure)
    records, fields = run_evolution(schedule, problem, fields=fields, tol=tol)
    xs = np.asarray(stations if stations is not None else preset.stations(), float)
    pf = np.array([c for _, c in cod_profile(mesh, fields, xs)])
    exact = cod_analytic(xs, preset.pressure, preset.crack_half_length,
                         material.plane_strain_modulus)
    return SneddonResult(records, fields, problem, alpha0, e_s, np.column_stack([xs, pf, exact]))
