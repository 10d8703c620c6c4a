"""Security/efficiency tradeoff: utility model, surrogate solver and oracles.

The surrogate problem replaces the unknown assignment probability by its
concave upper bound and is maximized by golden-section search. A Monte Carlo
grid search over the true probability serves as the independent check of the
approximation margin ``lipschitz * max_gap``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from typing import Callable, NamedTuple, Sequence

import numpy as np

from .stochastic import (
    ArrivalModel,
    estimate_p,
    invert_upper_bound,
    max_gap,
    upper_bound,
)

GOLDEN = (math.sqrt(5.0) - 1.0) / 2.0
LAMBDA_TOL = 1e-4


class InfeasibleError(ValueError):
    """The feasible interval for the fishing rate is empty."""


@dataclass(frozen=True)
class RewardModel:
    r_max: float = 105.0
    slope: float = 100.0
    offset: float = 5.0

    def __post_init__(self):
        if not self.r_max > 0:
            raise ValueError("r_max must be positive")

    def inverse(self, r: float) -> float:
        """Probability at which the reward equals r (r in (0, r_max))."""
        return (self.offset - math.log(self.r_max / r - 1.0)) / self.slope


def reward(p, model: RewardModel = RewardModel()):
    """Logistic reward r_max / (1 + exp(-(slope * p - offset)))."""
    p = np.asarray(p, dtype=float)
    out = model.r_max / (1.0 + np.exp(-(model.slope * p - model.offset)))
    return float(out) if out.ndim == 0 else out


def reward_slope(p, model: RewardModel = RewardModel()):
    r = np.asarray(reward(p, model))
    return model.slope * r * (1.0 - r / model.r_max)


@dataclass(frozen=True)
class UtilityConfig:
    """Parameters of the log-utility. Defaults are the Ethereum example."""

    p_min: float = 0.01
    lambda_x_max: float = 120.0
    c1: float = 1.0
    c2: float = 0.1
    deposit: float = 100.0
    lipschitz: float = 1.0
    reward: RewardModel = field(default_factory=RewardModel)
    lambda_y: float = 1000.0

    def __post_init__(self):
        if not 0 < self.p_min < 1:
            raise ValueError("p_min must lie in (0, 1)")
        if not self.lambda_x_max > 0:
            raise ValueError("lambda_x_max must be positive")
        if not self.deposit > 0:
            raise ValueError("deposit must be positive")
        if self.c1 < 0 or self.c2 < 0:
            raise ValueError("c1 and c2 must be nonnegative")
        if self.lambda_y < 0:
            raise ValueError("lambda_y must be nonnegative")


@dataclass(frozen=True)
class OptimizationResult:
    lambda_x_star: float
    mu1: float
    p_star: float
    reward_star: float
    rho: float
    margin: float
    accuracy: float

    def to_json(self) -> dict:
        return {k: float(v) for k, v in self.__dict__.items()}


# ---------------------------------------------------------------------------
# utility
# ---------------------------------------------------------------------------

def utility_ab(p, lambda_x, config: UtilityConfig):
    """U(p, lx) as a function of both arguments; -inf where a log argument is <= 0."""
    p = np.asarray(p, dtype=float)
    lx = np.asarray(lambda_x, dtype=float)
    r = np.asarray(reward(p, config.reward))
    with np.errstate(divide="ignore", invalid="ignore"):
        args = (
            1.0 - config.p_min / p,
            1.0 - lx / config.lambda_x_max,
            1.0 - r / config.deposit,
        )
        ok = (args[0] > 0) & (args[1] > 0) & (args[2] > 0)
        u = (np.log(np.where(ok, args[0], 1.0))
             + config.c1 * np.log(np.where(ok, args[1], 1.0))
             + config.c2 * np.log(np.where(ok, args[2], 1.0)))
    u = np.where(ok, u, -np.inf)
    return float(u) if u.ndim == 0 else u


def utility_gradient(p, lambda_x, config: UtilityConfig):
    """(dU/dp, dU/dlx) at feasible points."""
    p = np.asarray(p, dtype=float)
    lx = np.asarray(lambda_x, dtype=float)
    r = np.asarray(reward(p, config.reward))
    d_p = (config.p_min / (p * p) / (1.0 - config.p_min / p)
           - config.c2 * reward_slope(p, config.reward) / config.deposit / (1.0 - r / config.deposit))
    d_lx = -config.c1 / (config.lambda_x_max - lx)
    return d_p, d_lx


def utility(lambda_x, config: UtilityConfig, p_fn: Callable | None = None):
    """Objective at fishing rate lx with p = p_fn(lx) (the upper bound by default)."""
    if p_fn is None:
        p = upper_bound(lambda_x, config.lambda_y)
    else:
        p = p_fn(lambda_x)
    return utility_ab(p, lambda_x, config)


def local_lipschitz(config: UtilityConfig, p_range, lambda_range, points: int = 200) -> float:
    """Largest gradient norm of U(p, lx) over a box, sampled on a grid."""
    ps = np.linspace(*p_range, points)
    ls = np.linspace(*lambda_range, points)
    P, Lx = np.meshgrid(ps, ls)
    feasible = np.isfinite(utility_ab(P, Lx, config))
    if not feasible.all():
        raise ValueError("box leaves the feasible region")
    gp, gl = utility_gradient(P, Lx, config)
    return float(np.max(np.hypot(gp, gl)))


# ---------------------------------------------------------------------------
# feasible region and solvers
# ---------------------------------------------------------------------------

def feasible_interval(config: UtilityConfig) -> tuple[float, float]:
    """Open interval (lo, hi) where the security and efficiency logs are defined."""
    lo = float(invert_upper_bound(config.p_min, config.lambda_y))
    hi = float(config.lambda_x_max)
    if lo >= hi:
        raise InfeasibleError(f"empty feasible region: lo={lo:.6g} >= hi={hi:.6g}")
    return lo, hi


def effective_interval(config: UtilityConfig) -> tuple[float, float]:
    """Feasible interval additionally cut where the reward would reach the deposit."""
    lo, hi = feasible_interval(config)
    rm = config.reward
    if rm.r_max > config.deposit:
        p_cap = rm.inverse(config.deposit)
        if p_cap < 1:
            hi = min(hi, float(invert_upper_bound(max(p_cap, 0.0), config.lambda_y)))
    if lo >= hi:
        raise InfeasibleError(f"empty feasible region: lo={lo:.6g} >= hi={hi:.6g}")
    return lo, hi


def golden_section_max(f: Callable[[float], float], lo: float, hi: float,
                       tol: float = LAMBDA_TOL, max_iter: int = 500) -> tuple[float, float]:
    """Maximize a unimodal f on [lo, hi]; returns (argmax, max)."""
    a, b = lo, hi
    c = b - GOLDEN * (b - a)
    d = a + GOLDEN * (b - a)
    fc, fd = f(c), f(d)
    for _ in range(max_iter):
        if b - a <= tol:
            break
        if fc >= fd:
            b, d, fd = d, c, fc
            c = b - GOLDEN * (b - a)
            fc = f(c)
        else:
            a, c, fc = c, d, fd
            d = a + GOLDEN * (b - a)
            fd = f(d)
    x = 0.5 * (a + b)
    fx = f(x)
    # the midpoint can lose to the last probe when f is flat at tolerance scale
    for cand, fcand in ((c, fc), (d, fd)):
        if fcand > fx:
            x, fx = cand, fcand
    return x, fx


def accuracy_from(margin: float, mu1: float) -> float:
    if mu1 == 0:
        return float("nan")
    return 1.0 - margin / abs(mu1)


def solve_op1(config: UtilityConfig, tol: float = LAMBDA_TOL) -> OptimizationResult:
    lo, hi = effective_interval(config)
    # stay strictly inside the open interval
    pad = min(tol, (hi - lo) * 1e-6)
    x, mu1 = golden_section_max(lambda v: utility(v, config), lo + pad, hi - pad, tol)
    if not math.isfinite(mu1):
        raise InfeasibleError("no feasible fishing rate found")
    p_star = float(upper_bound(x, config.lambda_y))
    rho = max_gap(config.lambda_y, config.lambda_x_max)
    margin = config.lipschitz * rho
    return OptimizationResult(
        lambda_x_star=float(x),
        mu1=float(mu1),
        p_star=p_star,
        reward_star=reward(p_star, config.reward),
        rho=rho,
        margin=margin,
        accuracy=accuracy_from(margin, mu1),
    )


class GridOptimum(NamedTuple):
    lambda_x: float
    mu: float
    sigma: float


def default_grid(config: UtilityConfig, points: int) -> np.ndarray:
    lo, hi = feasible_interval(config)
    return lo + (hi - lo) * np.arange(1, points + 1) / (points + 1)


def _point_seed(seed: int, k: int) -> int:
    return int(np.random.SeedSequence(seed, spawn_key=(k,)).generate_state(1, np.uint64)[0])


def grid_solve_op_mc(config: UtilityConfig, grid_points: int, samples_per_point: int, seed: int,
                     grid: Sequence[float] | None = None,
                     p_fn: Callable | None = None) -> GridOptimum:
    """Brute-force maximizer of the true objective with Monte Carlo probabilities.

    ``sigma`` is the Monte Carlo error of the returned objective value,
    propagated through dU/dp at the maximizer. Passing ``p_fn`` replaces the
    sampler by a deterministic probability function (sigma is then 0).
    """
    if grid is None:
        if grid_points < 1:
            raise ValueError("grid_points must be positive")
        grid = default_grid(config, grid_points)
    grid = np.asarray(grid, dtype=float)
    ps = np.empty_like(grid)
    ses = np.zeros_like(grid)
    for k, lx in enumerate(grid):
        if p_fn is not None:
            ps[k] = p_fn(lx)
        else:
            est = estimate_p(ArrivalModel(float(lx), config.lambda_y), samples_per_point,
                             _point_seed(seed, k))
            ps[k], ses[k] = est.mean, est.std_error
    values = np.asarray(utility_ab(ps, grid, config), dtype=float)
    k = int(np.argmax(values))
    sigma = 0.0
    if math.isfinite(values[k]) and ses[k] > 0:
        d_p, _ = utility_gradient(ps[k], grid[k], config)
        sigma = float(abs(d_p) * ses[k])
    return GridOptimum(float(grid[k]), float(values[k]), sigma)


@dataclass(frozen=True)
class SweepRow:
    deposit: float
    c1: float
    c2: float
    lambda_x_star: float
    mu1: float
    p_star: float
    reward_star: float
    error: str = ""


def sweep_deposit(config: UtilityConfig, deposits: Sequence[float],
                  annotate_errors: bool = False) -> list[SweepRow]:
    """Solve the surrogate for each deposit; the table behind the deposit figures.

    With ``annotate_errors`` a failing deposit yields a row with NaNs and an
    error message instead of raising.
    """
    rows = []
    for d in deposits:
        try:
            res = solve_op1(replace(config, deposit=float(d)))
        except (ValueError, InfeasibleError) as exc:
            if not annotate_errors:
                raise
            nan = float("nan")
            rows.append(SweepRow(float(d), config.c1, config.c2, nan, nan, nan, nan, str(exc)))
            continue
        rows.append(SweepRow(float(d), config.c1, config.c2, res.lambda_x_star, res.mu1,
                             res.p_star, res.reward_star))
    return rows
