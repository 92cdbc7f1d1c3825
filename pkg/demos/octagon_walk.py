"""Walk on the genus-2 surface group generated by the regular octagon.

Builds the octagon, evaluates the singularity criterion, then watches the
empirical drift settle towards the speed of the walk and compares it with the
entropy bounds.
"""

import numpy as np

from hypwalk import freewalk as fwk
from hypwalk import fuchswalk as fw
from hypwalk import inequality as ineq
from hypwalk import polygon as pg

poly = pg.build(pg.PolygonSpec.uniform(4, 2))
rep = ineq.polygon_criterion(poly)
print(f"side-pairing translation length {rep.lengths[0]:.7f}")
print(f"logistic sum {rep.sigma:.7f} -> {rep.verdict}")

gens = pg.side_pairings(poly)
mu = fwk.StepDistribution.uniform("free", 8)
for n in (25, 50, 100, 200):
    drift = fw.estimate_drift(fw.simulate(gens, mu, n, 2000, seed=1))
    print(f"n = {n:4d}  d(o, w_n o) / n = {drift.ell_hat:.4f}  95% CI [{drift.ci_low:.4f}, {drift.ci_high:.4f}]")

bounds = fw.entropy_upper_bounds(mu, gens, 3)
print("entropy upper bounds H(mu^n)/n:", np.round(bounds, 5))
