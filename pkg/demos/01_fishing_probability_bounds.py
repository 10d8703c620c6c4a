# coding: utf-8

# # How often does a provider see a fishing task?
#
# Every slot brings X fishing tasks and Y regular tasks, both Poisson, plus
# one imposed task. A provider's chance of drawing a fishing task is
# E[X/(X+Y+1)]. Here we compare a Monte Carlo estimate against the two
# cheap bounds.

import numpy as np

from entrapnet import ArrivalModel, bounds, estimate_p, max_gap

LAMBDA_Y = 1000.0

# A small table. The upper bound tracks the estimate to about 1e-4.

print(f"{'lx':>6} {'lb':>10} {'mc':>10} {'ub':>10} {'ub-mc':>10}")
for lx in (10, 33.4, 60, 90, 120):
    pair = bounds(lx, LAMBDA_Y)
    est = estimate_p(ArrivalModel(lx, LAMBDA_Y), 200_000, seed=1)
    print(f"{lx:6.1f} {pair.lower:10.6f} {est.mean:10.6f} {pair.upper:10.6f} {pair.upper - est.mean:10.2e}")

# The gap ub - lb grows with lx, so its maximum over (0, 120] sits at the
# right end. More regular traffic shrinks it quickly.

for ly in (100.0, 1000.0, 10_000.0):
    print(f"max gap at ly={ly:>7g}: {max_gap(ly, 120.0):.3e}")

# Same seed, same numbers, whatever the batch split.

m = ArrivalModel(33.4, LAMBDA_Y)
a = estimate_p(m, 300_000, seed=5)
b = estimate_p(m, 300_000, seed=5, batches=4)
print("batched estimate agrees:", np.isclose(a.mean, b.mean, rtol=0, atol=1e-12))
