"""How often the surgery line meets the far side of an admissible pentagon.

Samples pentagons satisfying the angle hypotheses and records the angle at
the crossing point G. When FP and ED are ultraparallel there is no G at all.
"""

import math

import numpy as np

from hypwalk import polygon as pg
from hypwalk.exceptions import NoIntersection

rng = np.random.default_rng(9)
deltas, missed = [], 0
for _ in range(1000):
    try:
        deltas.append(pg.pentagon_surgery(*pg.sample_admissible_pentagon(rng)).delta)
    except NoIntersection:
        missed += 1
deltas = np.array(deltas)
print(f"crossing found in {len(deltas)} of 1000 pentagons, missing in {missed}")
print(f"largest delta - pi/2: {deltas.max() - math.pi / 2:.3e}")
print(f"median delta: {np.median(deltas):.4f}")
