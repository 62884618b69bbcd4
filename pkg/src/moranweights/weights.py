"""Ancestral weight dynamics driven by reproduction events.

Each tracked ancestor j owns a weight row w_j over the current population,
started as the indicator of j. When a child is born its entry is replaced by
the average of the parents' entries, so each row is a bounded martingale
with mean 1/N. The row minimum never decreases and the row maximum never
increases (the average of existing entries cannot leave their range), which
gives certified two-sided bounds on the common limit of all entries: once
max - min <= epsilon, every entry (and the limit) is pinned to that window.

The marginal weight M_n(j) = sum_i w_j(i) converges to N times the common
limit; its estimate from the bounds is N * (min + max) / 2 with certified
half-width N * (max - min) / 2.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .model import ModelConfig, ReproductionEvent
from .randomness import bit_generator

DEFAULT_EPSILON = 1e-9

# Allowed floating overshoot of the monotone bounds per rescan when the
# parent count is not a power of two (the division by m then rounds).
NONDYADIC_SLACK = 1e-12


def default_n_max(population_size: int) -> int:
    return 100 * population_size**2


def monotone_slack(parent_count: int) -> float:
    if parent_count & (parent_count - 1) == 0:
        return 0.0
    return NONDYADIC_SLACK


class AncestorWeights:
    """Weight rows of tracked ancestors with running spread bounds.

    ``rows[j]`` is the weight vector of ``tracked[j]`` over individuals
    1..N (stored 0-based). ``lower`` and ``upper`` hold the bounds from the
    most recent ``refresh_bounds`` scan.
    """

    def __init__(self, population_size: int, tracked: tuple[int, ...] | list[int]):
        tracked = tuple(int(j) for j in tracked)
        if not tracked:
            raise ValueError("tracked must name at least one ancestor")
        if len(set(tracked)) != len(tracked):
            raise ValueError(f"tracked ancestors must be distinct: {tracked}")
        for j in tracked:
            if not 1 <= j <= population_size:
                raise ValueError(f"ancestor {j} outside 1..{population_size}")
        self.population_size = population_size
        self.tracked = tracked
        self.rows = np.zeros((len(tracked), population_size), dtype=np.float64)
        for row, j in enumerate(tracked):
            self.rows[row, j - 1] = 1.0
        self.step = 0
        self.lower = self.rows.min(axis=1)
        self.upper = self.rows.max(axis=1)
        self._dyadic = True

    def _row_of(self, ancestor: int) -> int:
        try:
            return self.tracked.index(ancestor)
        except ValueError:
            raise KeyError(f"ancestor {ancestor} is not tracked") from None

    def column(self, ancestor: int) -> np.ndarray:
        return self.rows[self._row_of(ancestor)].copy()

    def marginal(self, ancestor: int) -> float:
        # sequential accumulation, matching the kernels bit for bit
        row = self.rows[self._row_of(ancestor)]
        acc = 0.0
        for i in range(self.population_size):
            acc += row[i]
        return float(acc)

    def apply_event(self, event: ReproductionEvent) -> None:
        if event.time != self.step:
            raise ValueError(f"expected event time {self.step}, got {event.time}")
        m = len(event.parents)
        child = event.child - 1
        for row in self.rows:
            acc = 0.0
            for parent in event.parents:
                acc += row[parent - 1]
            row[child] = acc / m
        if m & (m - 1) != 0:
            self._dyadic = False
        self.step += 1

    def refresh_bounds(self) -> np.ndarray:
        """Rescan rows, assert the bounds stayed monotone, return spreads."""
        slack = 0.0 if self._dyadic else NONDYADIC_SLACK
        lower = self.rows.min(axis=1)
        upper = self.rows.max(axis=1)
        if np.any(lower < self.lower - slack) or np.any(upper > self.upper + slack):
            raise RuntimeError(
                f"spread bounds moved outward at step {self.step}: "
                f"min {self.lower} -> {lower}, max {self.upper} -> {upper}"
            )
        self.lower, self.upper = lower, upper
        return self.spread

    @property
    def spread(self) -> np.ndarray:
        return self.upper - self.lower

    @property
    def estimate(self) -> np.ndarray:
        """Midpoint estimates of the limiting marginal weights."""
        return 0.5 * self.population_size * (self.lower + self.upper)

    @property
    def extinct(self) -> np.ndarray:
        return self.upper == 0.0


def init_weights(population_size: int, tracked) -> AncestorWeights:
    return AncestorWeights(population_size, tracked)


def apply_event(weights: AncestorWeights, event: ReproductionEvent) -> AncestorWeights:
    weights.apply_event(event)
    return weights


def marginal_weight(weights: AncestorWeights, ancestor: int) -> float:
    return weights.marginal(ancestor)


@dataclass(frozen=True)
class ConvergenceReport:
    """End state of one replicate run."""

    tracked: tuple[int, ...]
    population_size: int
    lower: np.ndarray
    upper: np.ndarray
    steps: int
    epsilon: float

    @property
    def spread(self) -> np.ndarray:
        return self.upper - self.lower

    @property
    def estimate(self) -> np.ndarray:
        return 0.5 * self.population_size * (self.lower + self.upper)

    @property
    def half_width(self) -> np.ndarray:
        """Certified error bound on each estimate."""
        return 0.5 * self.population_size * self.spread

    @property
    def extinct(self) -> np.ndarray:
        return self.upper == 0.0

    @property
    def converged(self) -> bool:
        return bool(self.spread.max() <= self.epsilon)


def _as_bit_generator(config: ModelConfig, rng):
    if rng is None:
        return bit_generator(config.seed)
    if isinstance(rng, (int, np.integer)):
        return bit_generator(int(rng))
    if isinstance(rng, np.random.SeedSequence):
        return np.random.PCG64(rng)
    if isinstance(rng, np.random.BitGenerator):
        return rng
    raise TypeError(f"rng must be None, int, SeedSequence or BitGenerator, got {type(rng)!r}")


def run_to_convergence(
    config: ModelConfig,
    tracked,
    *,
    epsilon: float = DEFAULT_EPSILON,
    n_max: int | None = None,
    check_every: int | None = None,
    rng=None,
    backend: str | None = None,
) -> ConvergenceReport:
    """Stream events until every tracked spread is <= epsilon or n_max events.

    Bounds are rescanned every ``check_every`` events (default N) plus once
    at the stopping step; monotonicity makes a late detection cost only
    extra events, never correctness.
    """
    from . import kernel

    tracked = tuple(int(j) for j in tracked)
    probe = AncestorWeights(config.population_size, tracked)  # validates tracked
    del probe
    if n_max is None:
        n_max = default_n_max(config.population_size)
    if check_every is None:
        check_every = config.population_size
    if check_every < 1:
        raise ValueError(f"check_every must be >= 1, got {check_every}")
    impl = kernel.get_backend(backend)
    tracked0 = np.asarray([j - 1 for j in tracked], dtype=np.int64)
    lower, upper, steps = impl.run_replicate(
        _as_bit_generator(config, rng),
        config.population_size,
        config.parent_count,
        config.variant_code,
        tracked0,
        float(epsilon),
        int(n_max),
        int(check_every),
        monotone_slack(config.parent_count),
    )
    return ConvergenceReport(
        tracked=tracked,
        population_size=config.population_size,
        lower=lower,
        upper=upper,
        steps=int(steps),
        epsilon=float(epsilon),
    )
