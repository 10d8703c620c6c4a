# coding: utf-8

# # A network with cheaters
#
# 100 providers, a fifth of them faulty. Each slot schedules tasks uniformly;
# the first fishing task a cheater touches gets it caught, its deposit goes
# into the pool and the reporting officer is paid from there.

from entrapnet import ArrivalModel, SimConfig, estimate_p, run

cfg = SimConfig(slots=5000, arrival=ArrivalModel(33.4, 1000.0), providers=100,
                malicious_fraction=0.2, seed=7)
rep = run(cfg)
s = rep.summary()
for key in ("catches_total", "false_accusations", "final_balance", "total_forfeited",
            "total_rewarded", "records_generated", "active_providers"):
    print(f"{key:>18}: {s[key]}")

# The observed share of fishing work should sit on the estimator's value.
est = estimate_p(cfg.arrival, 500_000, seed=1)
print(f"empirical p = {rep.empirical_p:.5f} +- {rep.empirical_p_stderr:.1e}")
print(f"estimated p = {est.mean:.5f} +- {est.std_error:.1e}")

# When was each cheater caught?
slots = [rep.fishing_log[k][0] for k, _ in rep.catch_log]
print("catch slots:", slots)
