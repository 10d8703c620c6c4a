"""End-to-end acceptance checks, one test per criterion.

Each test prints a single ``[acceptance N] PASS|FAIL ...`` line to the real
terminal (capture is bypassed) before asserting.
"""

import json
import math
import time
from dataclasses import replace

import numpy as np
import pytest
from scipy import stats

from entrapnet.cli import main
from entrapnet.config import load_config
from entrapnet.core import Task, TaskKind
from entrapnet.optimizer import (
    UtilityConfig,
    effective_interval,
    grid_solve_op_mc,
    solve_op1,
    sweep_deposit,
    utility,
)
from entrapnet.simulator import assign_uniform, run
from entrapnet.stochastic import ArrivalModel, estimate_p, lower_bound, max_gap, upper_bound
from entrapnet.verification import (
    AlignmentError,
    Appeal,
    Outcome,
    Tolerances,
    adjudicate,
    mean_result,
    pairwise_aligned,
    verify_fishing_result,
    witness_validate,
)

PRINTED_RHO_1000 = 0.000476


@pytest.fixture
def report(capsys):
    def emit(n, ok, detail):
        with capsys.disabled():
            print(f"\n[acceptance {n}] {'PASS' if ok else 'FAIL'} {detail}")
        assert ok, detail
    return emit


def test_1_optimum(report, capsys):
    t0 = time.perf_counter()
    code = main(["optimize", "--config", "paper"])
    elapsed = time.perf_counter() - t0
    res = json.loads(capsys.readouterr().out)
    ok = (code == 0 and abs(res["lambda_x_star"] - 33.4) <= 1.0
          and abs(res["mu1"] + 0.71) <= 0.02 and elapsed < 1.0)
    report(1, ok, f"lambda_x*={res['lambda_x_star']:.4f} mu1={res['mu1']:.5f} "
                  f"time={elapsed:.3f}s")


def test_2_bound_tightness(report):
    t0 = time.perf_counter()
    worst = (math.inf, -math.inf)
    ok = True
    for lx in (80, 85, 90, 95, 100):
        est = estimate_p(ArrivalModel(lx, 1000.0), 1_000_000, 1000 + lx)
        gap = upper_bound(lx, 1000.0) - est.mean
        worst = (min(worst[0], gap), max(worst[1], gap))
        ok &= 0 <= gap <= 2e-4
    elapsed = time.perf_counter() - t0
    ok &= elapsed < 30
    report(2, ok, f"ub-p_mc in [{worst[0]:.2e}, {worst[1]:.2e}] time={elapsed:.1f}s")


def test_3_sandwich(report):
    bad = []
    for ly in (10.0, 100.0, 1000.0):
        for lx in [1] + list(range(10, 121, 10)):
            est = estimate_p(ArrivalModel(lx, ly), 100_000, 7)
            se = est.std_error
            if not (lower_bound(lx, ly) <= est.mean + 4 * se and est.mean - 4 * se <= upper_bound(lx, ly)):
                bad.append((lx, ly))
    report(3, not bad, f"39 cells, violations={bad}")


def test_4_theorem_gap(report):
    rhos = [max_gap(ly, 120.0) for ly in (100.0, 1000.0, 10_000.0)]
    ok = rhos[0] > rhos[1] > rhos[2]
    parts = []
    for ly in (200.0, 1000.0):
        cfg = replace(UtilityConfig(), lambda_y=ly)
        res = solve_op1(cfg)
        mc = grid_solve_op_mc(cfg, 200, 100_000, 4242)
        diff = abs(mc.mu - res.mu1)
        bound = cfg.lipschitz * res.rho + 3 * mc.sigma
        ok &= diff <= bound
        parts.append(f"ly={ly:g}: |mu_mc-mu1|={diff:.2e} <= {bound:.2e}")
    report(4, ok, f"rho(100,1000,10000)=({rhos[0]:.6g}, {rhos[1]:.6g}, {rhos[2]:.6g}); "
                  + "; ".join(parts)
                  + f"; derived rho_1000={rhos[1]:.7f} vs printed {PRINTED_RHO_1000} (discrepancy)")


def test_5_concavity(report):
    cfg = UtilityConfig()
    lo, hi = effective_interval(cfg)
    xs = lo + (hi - lo) * np.arange(1, 501) / 501
    u = utility(xs, cfg)
    d2 = float(np.max(np.diff(u, 2)))
    k = int(np.argmax(u))
    res = solve_op1(cfg)
    cell = xs[1] - xs[0]
    ok = bool(np.all(np.isfinite(u))) and d2 <= 1e-9 and abs(res.lambda_x_star - xs[k]) <= cell
    report(5, ok, f"max second difference={d2:.2e} golden={res.lambda_x_star:.4f} "
                  f"grid={xs[k]:.4f} cell={cell:.4f}")


def test_6_uniformity(report):
    def counts(seed):
        out = assign_uniform(list(range(100_000)), list(range(10)), np.random.default_rng(seed))
        return np.bincount(list(out.values()), minlength=10)

    c = counts(2019)
    pval = stats.chisquare(c).pvalue
    ok = pval > 0.001 and np.array_equal(c, counts(2019))
    report(6, ok, f"chi-square p={pval:.4f} counts={c.tolist()}")


def test_7_protocol(report):
    sim = load_config("paper").sim_config()
    assert sim.slots == 10_000 and sim.malicious_fraction == 0.2 and sim.deposit == 100
    rep = run(sim)
    est = estimate_p(sim.arrival, 1_000_000, 77)
    sigma = math.hypot(rep.empirical_p_stderr, est.std_error)
    z = abs(rep.empirical_p - est.mean) / sigma
    ok = (rep.false_accusations == 0 and rep.catches_total == rep.fishing_to_faulty
          and z <= 4 and rep.conservation_satisfied)
    report(7, ok, f"catches={rep.catches_total} faulty_fishing={rep.fishing_to_faulty} "
                  f"false={rep.false_accusations} p_sim={rep.empirical_p:.6f} "
                  f"p_mc={est.mean:.6f} z={z:.2f} conservation={rep.conservation_satisfied}")


def test_8_sweep(report):
    ok = True
    parts = []
    for c1 in (0.5, 1.0, 2.0):
        rows = sweep_deposit(replace(UtilityConfig(), c1=c1), [50, 100, 200, 400])
        xs = [r.lambda_x_star for r in rows]
        rs = [r.reward_star for r in rows]
        ok &= all(b >= a for a, b in zip(xs, xs[1:])) and all(b >= a for a, b in zip(rs, rs[1:]))
        ok &= xs[-1] - xs[0] < 0.2 * 120
        parts.append(f"c1={c1:g}: {xs[0]:.2f}->{xs[-1]:.2f}")
    report(8, ok, "; ".join(parts))


def test_9_verification_tables(report):
    y = np.array([1.0, 2.0, -0.5])
    checks = [
        pairwise_aligned([y] * 4, 0.0),
        pairwise_aligned([y, 3 * y], 0.0),
        not pairwise_aligned([[1.0, 0.0], [0.0, 1.0]], 1.0),
        np.array_equal(mean_result([[2.0, 4.0]]), [2.0, 4.0]),
        np.array_equal(mean_result([[0.0, 0.0], [2.0, 2.0]]), [1.0, 1.0]),
        np.allclose(mean_result([y] * 5), y, rtol=0, atol=1e-15),
        verify_fishing_result(y, y, 0.0),
        verify_fishing_result(1.05 * y, y, 0.05),
        not verify_fishing_result(2 * y, y, 0.5),
        verify_fishing_result(7 * 1.05 * y, 7 * y, 0.05),
        pairwise_aligned([0.01 * y, 100 * y], 0.0),
    ]
    try:
        witness_validate(Task(0, TaskKind.FISHING, b"s", "o", 0),
                         [[1.0, 0.0], [0.0, 1.0], [1.0, 1.0]], Tolerances(delta_val=0.1), b"", b"")
        checks.append(False)
    except AlignmentError:
        checks.append(True)
    rec = witness_validate(Task(0, TaskKind.FISHING, b"s", "o", 0), [y, y, y], Tolerances(), b"p", b"k")
    tol = Tolerances(delta_ver=0.1)

    def judge(y_f, fields=rec.fields):
        return adjudicate(Appeal(np.asarray(y_f), fields, rec.abstract, "o", "p", 100.0), tol)

    honest, faulty = judge(y), judge(2 * y)
    tampered = judge(2 * y, rec.fields[:3] + (b"other",))
    checks += [
        honest.outcome is Outcome.DISMISS,
        faulty.outcome is Outcome.REWARD_OFFICER and faulty.forfeit == 100.0,
        not tampered.abstract_ok and tampered.outcome is Outcome.DISMISS,
    ]
    report(9, all(checks), f"{sum(checks)}/{len(checks)} table rows")


def test_10_determinism(report, tmp_path):
    y = np.array([1.0, -2.0, 0.5])
    rec = witness_validate(Task(1, TaskKind.FISHING, b"s", "o", 0), [y, y, y], Tolerances(), b"p", b"k")
    appeal = tmp_path / "appeal.json"
    obj = Appeal.against(rec, 2 * y, officer="o", provider="p", provider_deposit=100.0,
                         officer_deposit=1.0).to_json()
    appeal.write_text(json.dumps(obj))
    commands = {
        "bounds": ["bounds", "--config", "paper", "--lambda-x-max", "20", "--mc", "--samples", "20000"],
        "estimate": ["estimate", "--config", "paper", "--samples", "20000"],
        "optimize": ["optimize", "--config", "paper"],
        "sweep": ["sweep", "--config", "paper"],
        "simulate": ["simulate", "--config", "paper", "--slots", "500"],
        "adjudicate": ["adjudicate", "--config", "paper", "--appeal", str(appeal)],
    }
    differing = []
    for name, argv in commands.items():
        outs = []
        for k in range(2):
            out = tmp_path / f"{name}-{k}.out"
            extra = ["--trajectory", str(tmp_path / f"{name}-{k}.traj")] if name == "simulate" else []
            assert main(argv + ["--out", str(out)] + extra) == 0
            blob = out.read_bytes()
            if extra:
                blob += (tmp_path / f"{name}-{k}.traj").read_bytes()
            outs.append(blob)
        if outs[0] != outs[1]:
            differing.append(name)
    report(10, not differing, f"{len(commands)} subcommands, differing={differing}")
