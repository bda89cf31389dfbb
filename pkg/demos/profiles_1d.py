"""Penalized 1D crack profiles against an independent finite-difference solve.

The closed-form profiles are the backbone of the penalty calibration, so
here they are checked against a semismooth Newton solve of the same 1D
problem on a fine grid.  The printed columns show how the penalty bends
the profile away from the optimal one near the crack.

Run:  python3 demos/profiles_1d.py
"""

import numpy as np

from pfpenalty.oracle import fd_oracle_solve, oracle_grid_for, sample_on_stations
from pfpenalty.profiles import Profile1D, ProfileKind

ell, L = 1.0, 10.0
x = np.array([0.0, 0.25, 0.5, 1.0, 1.5, 2.0, 3.0])

for kind, p in ((ProfileKind.GAMMA_LINEAR, 100.0), (ProfileKind.GAMMA_QUADRATIC, 100.0),
                (ProfileKind.RHO, 40.0)):
    prof = Profile1D(kind, L, ell, p)
    xs, a = fd_oracle_solve(kind, ell, L, p, oracle_grid_for(p), return_grid=True)
    fd = sample_on_stations(xs, a, x)
    print(f"\n{kind.value}, penalty {p:g}")
    # the recovery penalty approximates the constrained linear-model optimum
    ref = prof.reference(x) if kind is not ProfileKind.RHO else \
        Profile1D(ProfileKind.LINEAR_OPTIMAL, L, ell)(x)
    print(f"{'x/ell':>6} {'closed form':>12} {'FD oracle':>12} {'optimal':>12}")
    for xi, c, f, r in zip(x, prof(x), fd, ref):
        print(f"{xi:6.2f} {c:12.8f} {f:12.8f} {r:12.8f}")
    st = np.linspace(0, L, 2001)
    print(f"sup |closed form - FD| = {np.max(np.abs(prof(st) - sample_on_stations(xs, a, st))):.1e}")
