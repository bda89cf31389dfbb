import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from pfpenalty.model import (HistoryField, MaterialSpec, ModelConfig, ModelKind, PenaltyGamma,
                             SplitKind, degradation, degradation_prime, degradation_prime2,
                             dissipation, dissipation_prime, dissipation_prime2, elastic_energy,
                             heaviside_neg, macaulay_neg, split_voigt, strain_energy_split)

MAT = MaterialSpec(210.0, 0.3, 2.7e-3, 0.01)
# zero or a physically sized strain; subnormal components only test float underflow
finite = st.one_of(st.just(0.0), st.floats(1e-8, 1e-2), st.floats(-1e-2, -1e-8))


def sym(a, b, c):
    return np.array([[a, c], [c, b]])


def full_stress(eps, mat):
    return mat.lame_lambda * np.trace(eps) * np.eye(2) + 2 * mat.lame_mu * eps


def test_material_derived_constants():
    m = MaterialSpec(1.0, 0.2, 1.0, 0.02)
    assert m.lame_mu == pytest.approx(1 / 2.4)
    assert m.lame_lambda == pytest.approx(0.2 / (1.2 * 0.6))
    assert m.plane_strain_modulus == pytest.approx(1 / 0.96)
    assert m.bulk_modulus_2d == pytest.approx(m.lame_lambda + m.lame_mu)


@pytest.mark.parametrize("kw", [dict(young_modulus=0), dict(poisson_ratio=0.5),
                                dict(poisson_ratio=-1.0), dict(toughness=-1),
                                dict(length_scale=0)])
def test_material_rejects_bad_data(kw):
    base = dict(young_modulus=1.0, poisson_ratio=0.2, toughness=1.0, length_scale=0.1)
    base.update(kw)
    with pytest.raises(ValueError):
        MaterialSpec(**base)


def test_model_constants_are_bound():
    assert ModelKind.AT1.c_w == pytest.approx(8 / 3)
    assert ModelKind.AT2.c_w == 2.0


def test_degradation_values():
    assert degradation(0.0) == 1.0
    assert degradation(1.0) == 0.0
    assert degradation(0.5) == 0.25
    assert degradation_prime(0.25) == pytest.approx(-1.5)
    assert degradation_prime2(0.7) == 2.0


def test_dissipation_values():
    assert dissipation(ModelKind.AT1, 1.0) == 1.0
    assert dissipation(ModelKind.AT2, 0.5) == 0.25
    assert dissipation_prime(ModelKind.AT1, 0.3) == 1.0
    assert dissipation_prime(ModelKind.AT2, 0.3) == pytest.approx(0.6)
    assert dissipation_prime2(ModelKind.AT1, 0.3) == 0.0
    assert dissipation_prime2(ModelKind.AT2, 0.3) == 2.0


def test_macaulay_and_step():
    assert macaulay_neg(-2.0) == -2.0
    assert macaulay_neg(3.0) == 0.0
    assert heaviside_neg(0.0) == 1.0
    assert heaviside_neg(1e-300) == 0.0
    assert heaviside_neg(-5.0) == 1.0


@settings(max_examples=60, deadline=None)
@given(st.floats(-3, 3, allow_nan=False))
def test_degradation_prime_matches_central_difference(a):
    h = 1e-5
    fd = (degradation(a + h) - degradation(a - h)) / (2 * h)
    assert abs(fd - degradation_prime(a)) <= 1e-8 * max(1.0, abs(degradation_prime(a)))


def test_nosplit_is_full_energy():
    eps = sym(1e-3, -2e-3, 5e-4)
    pp, pm, sp, sm = strain_energy_split(SplitKind.NO_SPLIT, eps, MAT)
    assert pp == pytest.approx(elastic_energy(eps, MAT), rel=1e-14)
    assert pm == 0.0
    assert np.allclose(sm, 0.0)


def test_voldev_hydrostatic_compression_has_no_tensile_part():
    pp, pm, *_ = strain_energy_split(SplitKind.VOL_DEV, -1e-3 * np.eye(2), MAT)
    assert pp == 0.0
    assert pm > 0


def test_spectral_uniaxial_tension():
    e = 2e-3
    pp, pm, *_ = strain_energy_split(SplitKind.SPECTRAL, sym(e, 0, 0), MAT)
    assert pp == pytest.approx(0.5 * MAT.lame_lambda * e**2 + MAT.lame_mu * e**2, rel=1e-13)
    assert pm == 0.0


@settings(max_examples=200, deadline=None)
@given(finite, finite, finite, st.sampled_from(list(SplitKind)))
def test_split_sums_to_full_energy_and_stress(a, b, c, kind):
    eps = sym(a, b, c)
    pp, pm, sp, sm = strain_energy_split(kind, eps, MAT)
    psi = elastic_energy(eps, MAT)
    assert pp >= 0 and pm >= 0
    assert abs(pp + pm - psi) <= 1e-13 * max(psi, 1e-300) + 1e-300
    sig = full_stress(eps, MAT)
    assert np.allclose(sp + sm, sig, rtol=1e-10, atol=1e-10 * max(np.abs(sig).max(), 1e-300))


@settings(max_examples=100, deadline=None)
@given(finite, finite, finite, st.sampled_from([SplitKind.VOL_DEV, SplitKind.SPECTRAL]))
def test_flipping_strain_swaps_bracket_terms(a, b, c, kind):
    # the compressive part of eps equals the tension part of -eps minus a deviatoric share
    eps = sym(a, b, c)
    pp, pm, *_ = strain_energy_split(kind, eps, MAT)
    qp, qm, *_ = strain_energy_split(kind, -eps, MAT)
    if kind is SplitKind.SPECTRAL:
        assert pp == pytest.approx(qm, rel=1e-12, abs=1e-300)
        assert pm == pytest.approx(qp, rel=1e-12, abs=1e-300)
    else:
        dev = eps - 0.5 * np.trace(eps) * np.eye(2)
        d = MAT.lame_mu * np.sum(dev * dev)
        tol = 1e-12 * elastic_energy(eps, MAT)
        assert abs(pp - d - qm) <= tol
        assert abs(qp - d - pm) <= tol


@pytest.mark.parametrize("kind", list(SplitKind))
def test_split_tangent_matches_stress_difference(kind, rng):
    eps = rng.normal(scale=1e-3, size=(20, 3))
    lam, mu = MAT.lame_lambda, MAT.lame_mu
    _, _, sp, sm, Dp, Dm = split_voigt(kind, eps, lam, mu, tangent=True)
    h = 1e-9
    for j in range(3):
        e = np.zeros(3)
        e[j] = h
        s1 = split_voigt(kind, eps + e, lam, mu, tangent=False)
        s0 = split_voigt(kind, eps - e, lam, mu, tangent=False)
        fd_p = (s1[2] - s0[2]) / (2 * h)
        fd_m = (s1[3] - s0[3]) / (2 * h)
        assert np.allclose(Dp[:, :, j], fd_p, rtol=1e-5, atol=1e-5 * abs(lam + 2 * mu))
        assert np.allclose(Dm[:, :, j], fd_m, rtol=1e-5, atol=1e-5 * abs(lam + 2 * mu))


def test_spectral_tangent_finite_at_coincident_eigenvalues():
    eps = np.array([[1e-3, 1e-3, 0.0]])
    *_, Dp, Dm = split_voigt(SplitKind.SPECTRAL, eps, MAT.lame_lambda, MAT.lame_mu)
    assert np.all(np.isfinite(Dp)) and np.all(np.isfinite(Dm))
    assert np.allclose(Dp + Dm, Dp[0] + Dm[0])


def test_penalty_and_config_validation():
    with pytest.raises(ValueError):
        PenaltyGamma(0.0)
    with pytest.raises(ValueError):
        ModelConfig(ModelKind.AT1, irreversibility="gamma")
    with pytest.raises(ValueError):
        ModelConfig(ModelKind.AT1, penalty_quadrature="gauss")
    cfg = ModelConfig(ModelKind.AT2, SplitKind.VOL_DEV, PenaltyGamma(5.0))
    assert cfg.gamma == 5.0 and not cfg.uses_history
    assert ModelConfig(ModelKind.AT2, irreversibility=HistoryField()).uses_history
