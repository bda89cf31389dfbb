import numpy as np
import pytest

from pfpenalty.errors import ConvergenceError, DomainError
from pfpenalty.oracle import fd_oracle_solve, oracle_grid_for, sample_on_stations
from pfpenalty.profiles import Profile1D, ProfileKind, xhat_star


@pytest.mark.parametrize("kind", [ProfileKind.GAMMA_LINEAR, ProfileKind.GAMMA_QUADRATIC,
                                  ProfileKind.RHO])
def test_oracle_matches_closed_form(kind):
    ell, L, p = 0.5, 2.0, 100.0
    x, a = fd_oracle_solve(kind, ell, L, p, oracle_grid_for(p), return_grid=True)
    st = np.linspace(0, L, 401)
    err = np.max(np.abs(sample_on_stations(x, a, st) - Profile1D(kind, L, ell, p)(st)))
    assert err <= 1e-6


def test_oracle_error_is_second_order():
    kind, p = ProfileKind.GAMMA_QUADRATIC, 100.0
    exact = Profile1D(kind, 4.0, 1.0, p)
    errs = []
    for n in (200, 400):
        x, a = fd_oracle_solve(kind, 1.0, 4.0, p, n, return_grid=True)
        errs.append(np.max(np.abs(a - exact(x))))
    assert 3.5 < errs[0] / errs[1] < 4.5


def test_oracle_zero_crossing_of_recovery_profile():
    # long domain: the fixed point assumes the tail never sees the far end
    r = 4.0
    x, a = fd_oracle_solve(ProfileKind.RHO, 1.0, 12.0, r, 4000, return_grid=True)
    i = np.flatnonzero(np.diff(np.sign(a)))[0]
    root = x[i] - a[i] * (x[i + 1] - x[i]) / (a[i + 1] - a[i])
    assert root == pytest.approx(xhat_star(r, 1.0), abs=1e-6)


def test_oracle_rejects_bad_input():
    with pytest.raises(DomainError):
        fd_oracle_solve(ProfileKind.GAMMA_LINEAR, 1.0, 4.0, 0.0)
    with pytest.raises(DomainError):
        fd_oracle_solve(ProfileKind.GAMMA_LINEAR, 1.0, 4.0, 10.0, grid_n=50)
    with pytest.raises(DomainError):
        fd_oracle_solve(ProfileKind.GAMMA_LINEAR, 1.0, 1.0, 10.0)
    with pytest.raises(DomainError):
        fd_oracle_solve(ProfileKind.LINEAR_OPTIMAL, 1.0, 4.0, 10.0)


def test_oracle_reports_non_convergence():
    with pytest.raises(ConvergenceError) as info:
        fd_oracle_solve(ProfileKind.GAMMA_LINEAR, 1.0, 4.0, 1e4, max_iter=1)
    assert len(info.value.history) == 1


def test_grid_rule():
    assert oracle_grid_for(100.0) == 3000
    assert oracle_grid_for(1.0) == 300
    assert oracle_grid_for(1e4) == 30000
