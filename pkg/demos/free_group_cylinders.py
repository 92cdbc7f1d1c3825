"""First-passage probabilities and cylinder masses for a non-uniform step law."""

import numpy as np

from hypwalk import freewalk as fwk

mu = fwk.StepDistribution("free", np.array([0.3, 0.2, 0.1, 0.1, 0.1, 0.1, 0.05, 0.05]))
fp = fwk.solve_first_passage(mu)
cyl = fwk.cylinder_measures(fp)
print("first-passage probabilities x_s:", np.round(fp.x, 6))
print("cylinder masses:", np.round(cyl.values, 6), "total", cyl.total)

est = fwk.mc_first_passage(mu, "s1", paths=20_000, horizon=2_000, seed=2)
print(f"Monte Carlo x_s1 = {est.estimate:.4f} +- {est.stderr:.4f} (solver {fp.x[0]:.4f})")
