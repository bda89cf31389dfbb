import math

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from pfpenalty.errors import DomainError
from pfpenalty.model import ModelKind
from pfpenalty.profiles import linear_unconstrained_energy
from pfpenalty.tuning import (F_gamma, F_gamma_exact, F_gamma_quadrature, F_prime_diagnostics,
                              F_rho, F_rho_exact, F_rho_quadrature, PenaltyBound, gamma_from_s,
                              gamma_opt, r_opt, r_opt_cubic, rho_opt, s_from_gamma, s_opt,
                              solve_F_gamma)

AT1, AT2 = ModelKind.AT1, ModelKind.AT2


def test_s_opt_exact_values():
    assert s_opt(AT1, 0.01) == 5625.0
    assert s_opt(AT2, 0.01) == 9999.0
    assert s_opt(AT2, 1.0) == 0.0


@pytest.mark.parametrize("model, expected", [(AT1, 1.14e12), (AT2, 2.7e12)])
def test_gamma_opt_shear_data(model, expected):
    # N/m^2 with G_c = 2700 N/m and ell = 1e-5 m
    assert gamma_opt(model, 2700.0, 1e-5) == pytest.approx(expected, rel=0.01)


@pytest.mark.parametrize("model, expected", [(AT1, 2.1e5), (AT2, 5e5)])
def test_gamma_opt_pressurized_crack_data(model, expected):
    assert gamma_opt(model, 1.0, 0.02) == pytest.approx(expected, rel=0.01)


def test_rho_opt_pressurized_crack():
    # largest domain edge 4, ell = 0.02: about 13.9e5
    assert rho_opt(1.0, 0.02, 4.0, 0.001) == pytest.approx(0.75 / 0.02 * 3 / 16 * 198 / 0.001)


@given(st.sampled_from([AT1, AT2]), st.floats(1e-3, 0.5))
def test_optimal_s_meets_target_at_leading_order(model, tol):
    s = s_opt(model, tol)
    if model is AT2:
        assert F_gamma(model, s, 200) == pytest.approx(1 - tol, rel=1e-12)
    else:
        # the AT1 optimum balances the s^(-1/2) term only
        assert 0.75 / math.sqrt(s) == pytest.approx(tol, rel=1e-12)


@given(st.sampled_from([AT1, AT2]), st.floats(1e-6, 1e12), st.floats(1e-6, 1e3),
       st.floats(1e-8, 1e-1))
def test_gamma_s_round_trip(model, s, gc, ell):
    assert s_from_gamma(model, gamma_from_s(model, s, gc, ell), gc, ell) == pytest.approx(s, rel=1e-12)


@given(st.sampled_from([AT1, AT2]), st.floats(1e-3, 0.4))
def test_s_opt_decreases_in_tolerance(model, tol):
    assert s_opt(model, tol) > s_opt(model, tol * 1.1)


@given(st.floats(10.0, 1e6), st.floats(2.0, 500.0))
def test_F_gamma_increases_with_penalty(s, ratio):
    for model in (AT1, AT2):
        assert F_gamma_exact(model, 2 * s, ratio) > F_gamma_exact(model, s, ratio) - 1e-15


@pytest.mark.parametrize("model", [AT1, AT2])
@pytest.mark.parametrize("s", [1e2, 1e4])
@pytest.mark.parametrize("ratio", [2.0, 20.0])
def test_F_gamma_exact_matches_quadrature(model, s, ratio):
    assert abs(F_gamma_exact(model, s, ratio) - F_gamma_quadrature(model, s, ratio)) <= 1e-6


def test_F_gamma_quadrature_independent_of_length_scale():
    a = F_gamma_quadrature(AT2, 1e3, 20.0, ell=1.0)
    b = F_gamma_quadrature(AT2, 1e3, 20.0, ell=0.01)
    assert a == pytest.approx(b, abs=1e-9)


def test_F_gamma_at_two_uses_the_short_domain_form():
    s = 400.0
    assert F_gamma(AT1, s, 2.0) == 1 - 0.75 / 20.0
    assert F_gamma(AT1, s, 2.0) == pytest.approx(F_gamma_exact(AT1, s, 2.0), abs=1e-3)


def test_solve_F_gamma_at1_large_domain():
    assert solve_F_gamma(AT1, 0.99, 200.0) == pytest.approx(11890, rel=0.01)


@pytest.mark.parametrize("r", [4.0, 40.0, 400.0])
def test_F_rho_exact_matches_quadrature(r):
    assert abs(F_rho_exact(r, 20.0) - F_rho_quadrature(r, 20.0)) <= 1e-8


@given(st.floats(1e3, 1e7), st.floats(3.0, 400.0))
def test_F_rho_leading_order_close_to_exact(r, ratio):
    assert abs(F_rho(r, ratio) - F_rho_exact(r, ratio)) <= 1.0 / r


@given(st.floats(1e-3, 0.5), st.floats(10.0, 400.0))
def test_r_opt_scaling(tol, ratio):
    r = r_opt(tol, ratio)
    assert r_opt(tol / 2, ratio) == pytest.approx(2 * r)
    assert F_rho(r, ratio) == pytest.approx(1 - tol + 1 / (16 * r**1.5), rel=1e-12)


def test_r_opt_cubic_close_to_linear_balance():
    r = r_opt(0.01, 200.0)
    assert r_opt_cubic(0.01, 200.0) == pytest.approx(r, rel=1e-3)


def test_slopes():
    assert F_prime_diagnostics(AT1, 0.01) == pytest.approx(8 / 9 * 1e-6)
    assert F_prime_diagnostics(AT2, 0.01) == pytest.approx(0.5e-6)
    assert F_prime_diagnostics("rho", 0.01, 200.0) == pytest.approx(16e-4 / (3 * 198))
    with pytest.raises(DomainError):
        F_prime_diagnostics("rho", 0.01)


@pytest.mark.parametrize("call", [
    lambda: s_opt(AT1, 0.0),
    lambda: s_opt(AT1, 1.5),
    lambda: gamma_opt(AT1, -1.0, 0.1),
    lambda: F_gamma(AT1, 100.0, 1.5),
    lambda: F_gamma(AT1, 0.5, 10.0),
    lambda: r_opt(0.01, 2.0),
    lambda: rho_opt(1.0, 0.02, 0.0),
    lambda: PenaltyBound.for_gamma(AT1, 1.0, 0.02, tol=0.7),
])
def test_domain_errors(call):
    with pytest.raises(DomainError):
        call()


def test_penalty_bound_records_inputs():
    b = PenaltyBound.for_rho(1.0, 0.02, 4.0, tol=0.001)
    assert b.ratio == 200.0
    assert b.physical == rho_opt(1.0, 0.02, 4.0, 0.001)
    g = PenaltyBound.for_gamma(AT2, 2.7e-3, 0.01)
    assert g.dimensionless == 9999.0 and g.slope == pytest.approx(0.5e-6)


def test_unconstrained_linear_energy_values():
    assert linear_unconstrained_energy(2.0) == pytest.approx(1.0, abs=1e-12)
    assert linear_unconstrained_energy(2 * math.sqrt(3)) == pytest.approx(0.0, abs=1e-12)
