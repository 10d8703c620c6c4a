"""Poisson arrivals and the fishing-assignment probability.

The security level of the network is the probability that a task handed to a
provider is a fishing task, ``p = E[X / (X + Y + 1)]`` with ``X ~ Pois(lx)``
fishing arrivals, ``Y ~ Pois(ly)`` regular arrivals and one imposed task per
slot. No closed form is used here; ``estimate_p`` samples it and the bound
functions give the analytic sandwich used by the optimizer.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

# Monte Carlo draws are generated in fixed-size chunks, each with its own
# SeedSequence child, so the sample stream does not depend on batching.
CHUNK_SIZE = 1 << 16
SERIES_MAX_TERMS = 50
SERIES_RTOL = 1e-16
GAP_GRID_POINTS = 10_000


class DomainError(ValueError):
    pass


@dataclass(frozen=True)
class ArrivalModel:
    lambda_x: float
    lambda_y: float

    def __post_init__(self):
        for name in ("lambda_x", "lambda_y"):
            v = getattr(self, name)
            if not (math.isfinite(v) and v >= 0):
                raise ValueError(f"{name} must be finite and >= 0, got {v!r}")


@dataclass(frozen=True)
class MonteCarloEstimate:
    mean: float
    std_error: float
    samples: int
    seed: int

    @property
    def variance(self) -> float:
        """Sample variance of the per-slot ratio."""
        return self.std_error**2 * self.samples


@dataclass(frozen=True)
class BoundPair:
    lower: float
    upper: float

    def __post_init__(self):
        if not self.lower <= self.upper < 1:
            raise ValueError(f"invalid bound pair ({self.lower}, {self.upper})")

    @property
    def gap(self) -> float:
        return self.upper - self.lower


def sample_slot_counts(model: ArrivalModel, rng: np.random.Generator) -> tuple[int, int]:
    """Draw one slot's (fishing, regular) arrival counts."""
    x = int(rng.poisson(model.lambda_x))
    y = int(rng.poisson(model.lambda_y))
    return x, y


def _chunk_rng(seed: int, index: int) -> np.random.Generator:
    return np.random.default_rng(np.random.SeedSequence(seed, spawn_key=(index,)))


def _chunk_stats(model: ArrivalModel, seed: int, index: int, n: int):
    rng = _chunk_rng(seed, index)
    x = rng.poisson(model.lambda_x, size=n)
    y = rng.poisson(model.lambda_y, size=n)
    r = x / (x + y + 1.0)
    mean = float(r.mean())
    m2 = float(((r - mean) ** 2).sum())
    return n, mean, m2


def _merge(a, b):
    # Chan et al. pairwise update of (count, mean, sum of squared deviations)
    na, ma, qa = a
    nb, mb, qb = b
    if na == 0:
        return b
    if nb == 0:
        return a
    n = na + nb
    delta = mb - ma
    mean = ma + delta * nb / n
    m2 = qa + qb + delta * delta * na * nb / n
    return n, mean, m2


def _to_estimate(stats, seed: int) -> MonteCarloEstimate:
    n, mean, m2 = stats
    var = m2 / (n - 1) if n > 1 else 0.0
    return MonteCarloEstimate(
        mean=min(max(mean, 0.0), 1.0),
        std_error=math.sqrt(var / n),
        samples=n,
        seed=seed,
    )


def merge_estimates(a: MonteCarloEstimate, b: MonteCarloEstimate) -> MonteCarloEstimate:
    """Combine two independent estimates of the same quantity."""
    sa = (a.samples, a.mean, a.variance * (a.samples - 1))
    sb = (b.samples, b.mean, b.variance * (b.samples - 1))
    return _to_estimate(_merge(sa, sb), a.seed)


def _chunk_sizes(samples: int):
    full, rest = divmod(samples, CHUNK_SIZE)
    sizes = [CHUNK_SIZE] * full
    if rest:
        sizes.append(rest)
    return sizes


def estimate_p(model: ArrivalModel, samples: int, seed: int, batches: int = 1) -> MonteCarloEstimate:
    """Monte Carlo estimate of E[X / (X + Y + 1)].

    ``batches`` only changes how chunk statistics are grouped before the
    final merge; the draws themselves are fixed by ``seed``.
    """
    if samples < 1:
        raise ValueError("samples must be positive")
    if batches < 1:
        raise ValueError("batches must be positive")
    sizes = _chunk_sizes(samples)
    groups = np.array_split(np.arange(len(sizes)), min(batches, len(sizes)))
    total = (0, 0.0, 0.0)
    for group in groups:
        acc = (0, 0.0, 0.0)
        for k in group:
            acc = _merge(acc, _chunk_stats(model, seed, int(k), sizes[k]))
        total = _merge(total, acc)
    return _to_estimate(total, seed)


# ---------------------------------------------------------------------------
# analytic bounds
# ---------------------------------------------------------------------------

def _scalar_or_array(v):
    return float(v) if np.ndim(v) == 0 else v


def alpha(lambda_x, lambda_y):
    """(lx / ly) * (1 - exp(-ly)); equals lx in the ly -> 0 limit."""
    lx = np.asarray(lambda_x, dtype=float)
    ly = np.asarray(lambda_y, dtype=float)
    with np.errstate(divide="ignore", invalid="ignore"):
        factor = np.where(ly > 0, -np.expm1(-ly) / np.where(ly > 0, ly, 1.0), 1.0)
    return _scalar_or_array(lx * factor)


def upper_bound(lambda_x, lambda_y):
    a = np.asarray(alpha(lambda_x, lambda_y))
    # 1 - 1/(1+a), written without cancellation
    return _scalar_or_array(a / (1.0 + a))


def series_sum(lambda_y: float) -> float:
    """Truncated asymptotic series sum_{j>=1} (j-1)! / ly^j.

    The series diverges, so terms are accumulated only while they keep
    shrinking and stay above SERIES_RTOL of the running sum (at most
    SERIES_MAX_TERMS terms).
    """
    if not lambda_y > 1:
        raise DomainError(f"series needs lambda_y > 1, got {lambda_y!r}")
    term = 1.0 / lambda_y
    total = term
    for j in range(1, SERIES_MAX_TERMS):
        nxt = term * j / lambda_y
        if nxt >= term or nxt < SERIES_RTOL * total:
            break
        total += nxt
        term = nxt
    return total


def lower_bound(lambda_x, lambda_y: float):
    s = series_sum(float(lambda_y))
    lx = np.asarray(lambda_x, dtype=float)
    raw = np.asarray(alpha(lx, lambda_y)) - lx * (1.0 + lx) / lambda_y * s
    return _scalar_or_array(np.maximum(raw, 0.0))


def bounds(lambda_x: float, lambda_y: float) -> BoundPair:
    return BoundPair(lower=lower_bound(lambda_x, lambda_y), upper=upper_bound(lambda_x, lambda_y))


def invert_upper_bound(p, lambda_y: float):
    """The fishing rate lx at which upper_bound(lx, ly) == p, for p in [0, 1)."""
    p = np.asarray(p, dtype=float)
    a = p / (1.0 - p)
    return _scalar_or_array(a / np.asarray(alpha(1.0, lambda_y)))


def gap_grid(lambda_x_max: float, points: int = GAP_GRID_POINTS) -> np.ndarray:
    """Uniform grid on (0, lambda_x_max], right end included."""
    return lambda_x_max * np.arange(1, points + 1) / points


def max_gap(lambda_y: float, lambda_x_max: float, points: int = GAP_GRID_POINTS) -> float:
    """Largest ub - lb over (0, lambda_x_max], by grid search."""
    if not lambda_x_max > 0:
        raise ValueError("lambda_x_max must be positive")
    grid = gap_grid(lambda_x_max, points)
    gap = upper_bound(grid, lambda_y) - lower_bound(grid, lambda_y)
    return float(np.max(gap))
