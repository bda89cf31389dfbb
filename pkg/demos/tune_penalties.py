"""How large must the irreversibility penalty be?

A penalty gamma lets the phase field heal a little: alpha may drop below its
previous value by roughly 1/gamma.  The normalized surface energy F of a
fully developed profile measures the damage that does: F = 1 means no loss.
We pick the smallest dimensionless penalty s with F >= 1 - tol and turn it
into a physical gamma for two material sets.

Run:  python3 demos/tune_penalties.py
"""

from pfpenalty import ModelKind
from pfpenalty.tuning import (F_gamma, F_gamma_exact, gamma_opt, r_opt, rho_opt, s_opt,
                              solve_F_gamma)

AT1, AT2 = ModelKind.AT1, ModelKind.AT2

print("energy retained by the penalized profile, L/ell = 200")
print(f"{'s':>10} {'AT1 exact':>12} {'AT1 leading':>12} {'AT2 exact':>12}")
for s in (1e1, 1e2, 1e3, 1e4, 1e5):
    print(f"{s:10.0e} {F_gamma_exact(AT1, s, 200):12.6f} {F_gamma(AT1, s, 200):12.6f} "
          f"{F_gamma_exact(AT2, s, 200):12.6f}")

tol = 0.01
print(f"\nsmallest s keeping {100 * (1 - tol):.0f}% of the energy")
for model in (AT1, AT2):
    print(f"  {model.value}: closed form {s_opt(model, tol):.0f}, "
          f"root of the exact F (L/ell = 200) {solve_F_gamma(model, 1 - tol, 200):.0f}")

print("\nphysical penalties")
for label, gc, ell in (("shear test, SI units", 2700.0, 1e-5), ("pressurized crack", 1.0, 0.02)):
    g1, g2 = gamma_opt(AT1, gc, ell, tol), gamma_opt(AT2, gc, ell, tol)
    print(f"  {label:22s} G_c={gc:g} ell={ell:g}:  AT1 {g1:.3g}  AT2 {g2:.3g}")

# AT1 also needs alpha >= 0 when the initial crack is recovered; that penalty
# grows with the domain size because the tail of the profile is long
print("\nrecovery penalty for AT1 (pressurized crack, domain edge 4)")
for t in (0.01, 0.001):
    print(f"  tol {t}: r = {r_opt(t, 4 / 0.02):.4g}, rho = {rho_opt(1.0, 0.02, 4.0, t):.4g}")
