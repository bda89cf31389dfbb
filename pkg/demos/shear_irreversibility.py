"""Loading and unloading of a notched square in shear, with a strong and a weak penalty.

The top edge is pushed sideways until a crack runs from the notch, then
pulled back.  With the tuned penalty the crack stays put during unloading:
the surface energy is frozen and the force returns to zero along a line.
With a penalty a hundred times smaller the crack partly heals and the
surface energy drops.

This uses a coarse mesh and a large length scale so it finishes in a
minute or two; the benchmark preset is much finer.

Run:  python3 demos/shear_irreversibility.py
"""

from pfpenalty import ModelKind, SplitKind
from pfpenalty.benchmarks import SenPreset, run_sen
from pfpenalty.evolution import LoadingSchedule
from pfpenalty.tuning import gamma_opt

preset = SenPreset(length_scale=0.2, h_fine=0.05, h_coarse=0.1)
mat = preset.material
up = [0.005 * k for k in range(1, 9)]
schedule = LoadingSchedule(up + [0.03, 0.02, 0.01, 0.0])
g_opt = gamma_opt(ModelKind.AT1, mat.toughness, mat.length_scale)

for label, gamma in (("tuned penalty", g_opt), ("0.01 x tuned", 0.01 * g_opt)):
    records, fields, _ = run_sen(preset, ModelKind.AT1, SplitKind.VOL_DEV, gamma, schedule=schedule)
    print(f"\n{label}: gamma = {gamma:.3g}")
    print(f"{'load':>8} {'force':>10} {'E_S':>11} {'iters':>6}")
    for r in records:
        print(f"{r.load:8.4f} {r.reaction:10.5f} {r.surface:11.4e} {r.stag_iters:6d}")
