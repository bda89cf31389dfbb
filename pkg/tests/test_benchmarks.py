from dataclasses import replace

import numpy as np
import pytest

from pfpenalty.benchmarks import (SEN_DESK, SEN_FULL, SNEDDON_FULL, resolve_irreversibility,
                                  run_sneddon, sen_problem, sneddon_problem)
from pfpenalty.errors import ConfigurationError
from pfpenalty.evolution import LoadStep
from pfpenalty.model import HistoryField, ModelConfig, ModelKind, PenaltyGamma, SplitKind
from pfpenalty.tuning import gamma_opt


def test_resolve_irreversibility_modes():
    mat = SEN_FULL.material
    auto = resolve_irreversibility("auto", ModelKind.AT2, mat)
    assert auto.gamma == gamma_opt(ModelKind.AT2, mat.toughness, mat.length_scale)
    assert isinstance(resolve_irreversibility("History", ModelKind.AT1, mat), HistoryField)
    assert resolve_irreversibility("1e6", ModelKind.AT1, mat).gamma == 1e6
    assert resolve_irreversibility(5.0, ModelKind.AT1, mat).gamma == 5.0
    keep = PenaltyGamma(3.0)
    assert resolve_irreversibility(keep, ModelKind.AT1, mat) is keep
    with pytest.raises(ConfigurationError):
        resolve_irreversibility("sometimes", ModelKind.AT1, mat)


def test_presets():
    assert SEN_FULL.length_scale == 0.01 and SEN_FULL.h_fine == 0.0025
    assert SEN_DESK.length_scale == 0.04
    assert SEN_DESK.h_fine / SEN_DESK.length_scale == SEN_FULL.h_fine / SEN_FULL.length_scale
    st = SNEDDON_FULL.stations()
    assert st.size == 41 and st[0] == -0.25 and st[-1] == 0.25 and 0.0 in st


def test_sen_boundary_conditions():
    p = replace(SEN_DESK, h_fine=0.1, h_coarse=0.2)
    mesh = p.mesh()
    prob = sen_problem(mesh, p.material, ModelConfig(ModelKind.AT1, SplitKind.VOL_DEV))
    top, bottom = mesh.boundary_nodes("top"), mesh.boundary_nodes("bottom")
    vals = prob.u_values(LoadStep(0.01))
    fixed = prob.dofmap.u_fixed
    assert set(fixed) == set(np.r_[2 * top, 2 * top + 1, 2 * bottom, 2 * bottom + 1])
    np.testing.assert_array_equal(vals[np.isin(fixed, 2 * top)], 0.01)
    assert np.all(vals[~np.isin(fixed, 2 * top)] == 0.0)
    np.testing.assert_array_equal(prob.dofmap.a_fixed, top)
    none = sen_problem(mesh, p.material, ModelConfig(ModelKind.AT1), intact_edges=())
    assert none.dofmap.a_fixed.size == 0


def test_sneddon_boundary_is_clamped():
    mesh = replace(SNEDDON_FULL, length_scale=0.08, h_fine=0.04, h_coarse=0.5, h_crack=0.01).mesh()
    prob = sneddon_problem(mesh, SNEDDON_FULL.material, ModelConfig(ModelKind.AT2))
    x, y = mesh.nodes[prob.dofmap.u_fixed[::2] // 2].T
    assert np.all((np.abs(x) == 2.0) | (np.abs(y) == 2.0))
    assert prob.dofmap.u_fixed.size == 2 * np.unique(mesh.boundary_edges.ravel()).size


def test_coarse_sneddon_run():
    preset = replace(SNEDDON_FULL, length_scale=0.08, h_fine=0.02, h_coarse=0.5, h_crack=0.005)
    res = run_sneddon(preset, ModelKind.AT2)
    x, pf, exact = res.cod.T
    assert res.records[0].res_stag <= 1e-4
    assert np.all(pf > 0)
    # symmetric opening, largest near the centre (the mirrored cell
    # diagonals meet at x = 0 and soften it slightly less)
    np.testing.assert_allclose(pf, pf[::-1], rtol=1e-6, atol=1e-10)
    assert pf[x.size // 2] >= 0.995 * pf.max()
    assert pf.max() < exact.max()
    assert res.recovery_energy > 2 * preset.crack_half_length * preset.toughness


def test_desk_schedule_is_the_scaled_loading_curve():
    loads = [st.displacement for st in SEN_DESK.schedule()]
    assert len(loads) == 34
    assert loads[0] == pytest.approx(12e-3) and loads[20] == pytest.approx(24e-3)
    assert loads[-1] == pytest.approx(0.6e-3)
