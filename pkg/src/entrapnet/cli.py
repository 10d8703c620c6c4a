"""Command-line entry point.

Subcommands: bounds, estimate, optimize, sweep, simulate, adjudicate.
Exit codes: 0 ok, 1 parse/usage error, 2 empty feasible region, 3 internal.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import sys
from dataclasses import replace
from pathlib import Path

from .config import ConfigError, RunConfig, load_config
from .optimizer import InfeasibleError, solve_op1, sweep_deposit
from .simulator import run
from .stochastic import ArrivalModel, DomainError, estimate_p, lower_bound, upper_bound
from .verification import Appeal, Tolerances, VerificationError, adjudicate

EXIT_OK, EXIT_PARSE, EXIT_INFEASIBLE, EXIT_INTERNAL = 0, 1, 2, 3

BOUNDS_HEADER = ["lambda_x", "lambda_y", "lb", "ub", "mc_mean", "mc_stderr", "samples", "seed"]
SWEEP_HEADER = ["deposit", "c1", "c2", "lambda_x_star", "mu1", "p_star", "reward_star", "error"]
TRAJECTORY_HEADER = ["slot", "balance", "catches", "empirical_p"]
DEFAULT_SAMPLES = 100_000


class UsageError(ValueError):
    pass


def fmt(v) -> str:
    if v is None:
        return ""
    if isinstance(v, float):
        return format(v, ".12g")
    return str(v)


def render_csv(header, rows) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for row in rows:
        w.writerow([fmt(v) for v in row])
    return buf.getvalue()


def render_json(obj) -> str:
    return json.dumps(obj, sort_keys=True, indent=2, allow_nan=True) + "\n"


def emit(text: str, out: str | None):
    if out:
        Path(out).write_text(text, encoding="utf-8")
    else:
        sys.stdout.write(text)


def _config(args) -> RunConfig:
    cfg = load_config(args.config) if args.config else RunConfig()
    if getattr(args, "seed", None) is not None:
        cfg.seed = args.seed
    return cfg


def _u64(text: str) -> int:
    v = int(text)
    if not 0 <= v < 2**64:
        raise argparse.ArgumentTypeError("seed must be an unsigned 64-bit integer")
    return v


def _floats(text: str) -> list[float]:
    try:
        return [float(t) for t in text.split(",") if t.strip()]
    except ValueError as exc:
        raise argparse.ArgumentTypeError(str(exc)) from None


def _bounds_row(lx, ly, mc, samples, seed):
    lb = lower_bound(lx, ly)
    ub = upper_bound(lx, ly)
    if not mc:
        return [lx, ly, lb, ub, None, None, None, None]
    est = estimate_p(ArrivalModel(lx, ly), samples, seed)
    return [lx, ly, lb, ub, est.mean, est.std_error, samples, seed]


def lambda_range(lo: float, hi: float, step: float) -> list[float]:
    if not step > 0:
        raise UsageError("step must be positive")
    if lo < 0:
        raise UsageError("lambda_x range must be nonnegative")
    if hi < lo:
        return []
    n = int(math.floor((hi - lo) / step + 1e-9)) + 1
    return [lo + k * step for k in range(n)]


def cmd_bounds(args) -> int:
    cfg = _config(args)
    ly = args.lambda_y if args.lambda_y is not None else cfg.arrival.lambda_y
    rows = [_bounds_row(lx, ly, args.mc, args.samples, cfg.seed)
            for lx in lambda_range(args.lambda_x_min, args.lambda_x_max, args.step)]
    emit(render_csv(BOUNDS_HEADER, rows), args.out)
    return EXIT_OK


def cmd_estimate(args) -> int:
    cfg = _config(args)
    ly = args.lambda_y if args.lambda_y is not None else cfg.arrival.lambda_y
    xs = args.lambda_x if args.lambda_x else [cfg.arrival.lambda_x]
    rows = [_bounds_row(lx, ly, True, args.samples, cfg.seed) for lx in xs]
    emit(render_csv(BOUNDS_HEADER, rows), args.out)
    return EXIT_OK


def cmd_optimize(args) -> int:
    cfg = _config(args)
    res = solve_op1(cfg.utility_config())
    payload = res.to_json()
    payload["seed"] = cfg.seed
    emit(render_json(payload), args.out or cfg.output.get("summary"))
    return EXIT_OK


def cmd_sweep(args) -> int:
    cfg = _config(args)
    deposits = args.deposits if args.deposits is not None else cfg.sweep.get("deposits")
    if not deposits:
        raise UsageError("no deposits given")
    c1s = args.c1 if args.c1 is not None else cfg.sweep.get("c1") or [cfg.utility_config().c1]
    base = cfg.utility_config()
    rows = []
    for c1 in c1s:
        for r in sweep_deposit(replace(base, c1=c1), deposits, annotate_errors=True):
            rows.append([r.deposit, r.c1, r.c2, r.lambda_x_star, r.mu1, r.p_star,
                         r.reward_star, r.error])
    emit(render_csv(SWEEP_HEADER, rows), args.out or cfg.output.get("csv"))
    return EXIT_OK


def cmd_simulate(args) -> int:
    cfg = _config(args)
    sim = cfg.sim_config()
    if args.slots is not None:
        sim = replace(sim, slots=args.slots)
    report = run(sim)
    summary = report.summary()
    summary["seed"] = cfg.seed
    emit(render_json(summary), args.out or cfg.output.get("summary"))
    traj_path = args.trajectory or cfg.output.get("trajectory")
    if traj_path:
        Path(traj_path).write_text(render_csv(TRAJECTORY_HEADER, report.trajectory), encoding="utf-8")
    return EXIT_OK


_APPEAL_KEYS = {"provider_result", "record", "stored_abstract", "officer", "provider",
                "provider_deposit", "officer_deposit", "tolerances"}


def cmd_adjudicate(args) -> int:
    cfg = _config(args)
    text = Path(args.appeal).read_text(encoding="utf-8")
    try:
        obj = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{args.appeal}: line {exc.lineno}, column {exc.colno}: {exc.msg}") from exc
    if not isinstance(obj, dict):
        raise ConfigError("appeal must be a JSON object")
    unknown = sorted(set(obj) - _APPEAL_KEYS)
    if unknown:
        raise ConfigError(f"appeal: unknown keys: {', '.join(unknown)}")
    tol = cfg.tolerances
    try:
        if "tolerances" in obj:
            tol = Tolerances(**obj["tolerances"])
        appeal = Appeal.from_json(obj)
    except (KeyError, TypeError, ValueError) as exc:
        raise ConfigError(f"malformed appeal: {exc}") from exc
    emit(render_json(adjudicate(appeal, tol).to_json()), args.out)
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="entrapnet", description="Fishing-task rate tuning, bounds, simulation and appeals.")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, samples=False):
        p.add_argument("--config", help="JSON run config (or 'paper' for the bundled example)")
        p.add_argument("--seed", type=_u64, help="override the config seed")
        p.add_argument("--out", help="write output here instead of stdout")
        if samples:
            p.add_argument("--samples", type=int, default=DEFAULT_SAMPLES)

    p = sub.add_parser("bounds", help="lower/upper bound table over a lambda_x range")
    common(p, samples=True)
    p.add_argument("--lambda-y", type=float)
    p.add_argument("--lambda-x-min", type=float, default=0.0)
    p.add_argument("--lambda-x-max", type=float, default=120.0)
    p.add_argument("--step", type=float, default=1.0)
    p.add_argument("--mc", action="store_true", help="add a Monte Carlo column")
    p.set_defaults(func=cmd_bounds)

    p = sub.add_parser("estimate", help="Monte Carlo estimate of the fishing probability")
    common(p, samples=True)
    p.add_argument("--lambda-x", type=float, nargs="+")
    p.add_argument("--lambda-y", type=float)
    p.set_defaults(func=cmd_estimate)

    p = sub.add_parser("optimize", help="solve the surrogate problem")
    common(p)
    p.set_defaults(func=cmd_optimize)

    p = sub.add_parser("sweep", help="optimal rate and reward across deposits")
    common(p)
    p.add_argument("--deposits", type=_floats, help="comma-separated deposits")
    p.add_argument("--c1", type=_floats, help="comma-separated efficiency weights")
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("simulate", help="run the slot simulator")
    common(p)
    p.add_argument("--slots", type=int)
    p.add_argument("--trajectory", help="CSV path for the per-slot trajectory")
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("adjudicate", help="judge an appeal given as JSON")
    common(p)
    p.add_argument("--appeal", required=True, help="appeal JSON file")
    p.set_defaults(func=cmd_adjudicate)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_OK if exc.code == 0 else EXIT_PARSE
    try:
        return args.func(args)
    except InfeasibleError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INFEASIBLE
    except (ConfigError, UsageError, DomainError, VerificationError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_PARSE
    except Exception as exc:  # noqa: BLE001
        print(f"internal error: {exc!r}", file=sys.stderr)
        return EXIT_INTERNAL


if __name__ == "__main__":
    sys.exit(main())
