# coding: utf-8

# # Picking the fishing rate
#
# More fishing tasks catch cheaters sooner but waste capacity. The utility
# trades security, efficiency and the reward bill against each other; with
# the upper bound standing in for the true probability it is concave, so a
# golden-section search finds the optimum.

import numpy as np

from entrapnet import UtilityConfig, solve_op1, utility
from entrapnet.optimizer import effective_interval

cfg = UtilityConfig()  # D=100, c1=1, c2=0.1, ly=1000, lx_max=120, p_min=0.01
res = solve_op1(cfg)
print(f"lambda_x* = {res.lambda_x_star:.3f}")
print(f"mu1       = {res.mu1:.5f}")
print(f"p*        = {res.p_star:.6f}, reward = {res.reward_star:.3f}")
print(f"max gap   = {res.rho:.6f}, accuracy = {res.accuracy:.4%}")

# Below lx ~ 10.1 the security floor p_min is not met. Near lx ~ 86.7 the
# reward would exceed the deposit. In between the curve is a smooth hill.

lo, hi = effective_interval(cfg)
xs = np.linspace(lo, hi, 12)[1:-1]
for x, u in zip(xs, utility(xs, cfg)):
    print(f"  U({x:6.2f}) = {u: .4f}")
