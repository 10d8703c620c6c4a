# coding: utf-8

# # What a bigger deposit buys
#
# Raising the deposit D loosens the reward constraint. The optimal rate
# creeps up only slowly; the efficiency weight c1 matters far more.

from dataclasses import replace

from entrapnet import UtilityConfig, sweep_deposit

deposits = [50, 100, 200, 400]
print(f"{'c1':>4} " + " ".join(f"D={d:<5}" for d in deposits))
for c1 in (0.5, 1.0, 2.0):
    rows = sweep_deposit(replace(UtilityConfig(), c1=c1), deposits)
    print(f"{c1:4g} " + " ".join(f"{r.lambda_x_star:7.2f}" for r in rows))

# The reward at the optimum follows the same pattern.
rows = sweep_deposit(UtilityConfig(), deposits)
print("reward*:", [round(r.reward_star, 2) for r in rows])
