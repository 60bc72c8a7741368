"""
Distance scaling with n
=======================

A small version of the scaling experiments: the mean row-sum bound between the
preferential attachment graph (G1) and the loopless W-random graph (G7), fitted
on a log-log scale. Larger grids and more replications live in
configs/acceptance.ini.
"""

from pagcoupling.distance import beta_exponent
from pagcoupling.experiments import ExperimentConfig, run_scaling

alpha = 5 / 3
cfg = ExperimentConfig(c=0.5, alpha=alpha, n_grid=[32, 64, 128, 256], replications=40, run_seed=1, pair=(1, 7))
run = run_scaling(cfg)

for r in run.records:
    print(f"n={r['n']:4d} mean={r['mean']:.4f} +- {r['stderr']:.4f}")
print(f"fitted slope {run.slope:.3f} (r2 {run.r_squared:.3f}); "
      f"upper-bound exponent at alpha=5/3: {float(beta_exponent(alpha)):.3f} up to log factors")

# Which links of the chain carry the distance? Fit each consecutive pair alone.
print("\nper-link slopes on the same grid:")
for pair in [(1, 2), (2, 3), (3, 4), (5, 6), (6, 7)]:
    part = run_scaling(ExperimentConfig(c=0.5, alpha=alpha, n_grid=[32, 64, 128, 256],
                                        replications=20, run_seed=1, pair=pair))
    print(f"  G{pair[0]} vs G{pair[1]}: slope {part.slope:+.3f}, mean at n=256 {part.records[-1]['mean']:.4f}")
