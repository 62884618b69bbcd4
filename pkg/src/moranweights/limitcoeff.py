"""Large-N structure of the configuration chain.

Houses the limit coefficients of the stationary law (nu(x) ~ K(x) / N^k per
labelled vector), the exact recursion they satisfy in the two-parent case,
the order-in-1/N taxonomy of lumped transitions, and numeric checks that
exact finite-N chains approach both.

The closed form implemented here is K(x) = prod_i k_i! (m/(m-1))^(k_i - 1).
For m = 2 this is the familiar prod_i 2^(k_i-1) k_i!. The general-m factor
m/(m-1) (rather than m) is forced by the chain itself: the two-state order-2
balance gives E[M^2] = 2mN / (2m + (m-1)(N-1)) -> 2m/(m-1), which the
closed form must reproduce at {2}; see also the matching limit law in
``limitlaw``.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from math import comb, factorial

import numpy as np

from .configchain import Configuration, as_configuration, build_transition_matrix, partitions
from .stationary import lift_to_vector, stationary_linear


def limit_coefficient(config, parent_count: int = 2) -> Fraction:
    """K(x): the limit of N^k nu(vector) for a labelled vector of configuration x."""
    config = as_configuration(config)
    m = parent_count
    if m < 2:
        raise ValueError(f"parent_count must be >= 2, got {m}")
    out = Fraction(1)
    for part in config.parts:
        out *= factorial(part) * Fraction(m, m - 1) ** (part - 1)
    return out


@dataclass(frozen=True)
class RecursionCheck:
    config: Configuration
    lhs: Fraction
    rhs: Fraction

    @property
    def passed(self) -> bool:
        return self.lhs == self.rhs


@dataclass(frozen=True)
class RecursionReport:
    checks: tuple[RecursionCheck, ...]

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.checks)

    @property
    def failures(self) -> tuple[RecursionCheck, ...]:
        return tuple(c for c in self.checks if not c.passed)


def recursion_sides(config) -> tuple[Fraction, Fraction]:
    """Both sides of the first-order balance the coefficients satisfy (m = 2).

    K(x) [l - 2 sum_mu 2^(-k_mu)] = 2 sum_mu sum_{i=1}^{k_mu - 1}
    2^(-i) C(k_mu, i) K(x with k_mu split into (k_mu - i, i)).
    For all-ones configurations both sides degenerate to zero.
    """
    config = as_configuration(config)
    parts = config.parts
    bracket = Fraction(len(parts)) - 2 * sum(Fraction(1, 2**p) for p in parts)
    lhs = limit_coefficient(config, 2) * bracket
    rhs = Fraction(0)
    for mu, part in enumerate(parts):
        rest = parts[:mu] + parts[mu + 1 :]
        for i in range(1, part):
            child = as_configuration(rest + (part - i, i))
            rhs += Fraction(1, 2**i) * comb(part, i) * limit_coefficient(child, 2)
    rhs *= 2
    return lhs, rhs


def verify_recursion(k_max: int) -> RecursionReport:
    """Exact recursion check over every partition of every k <= k_max (m = 2)."""
    if k_max < 1:
        raise ValueError(f"k_max must be >= 1, got {k_max}")
    checks = []
    for k in range(1, k_max + 1):
        for config in partitions(k):
            lhs, rhs = recursion_sides(config)
            checks.append(RecursionCheck(config, lhs, rhs))
    return RecursionReport(tuple(checks))


def _split_destinations(parts: tuple[int, ...]) -> set[tuple[int, ...]]:
    out = set()
    for i, part in enumerate(parts):
        rest = parts[:i] + parts[i + 1 :]
        for a in range(1, part // 2 + 1):
            out.add(tuple(sorted(rest + (part - a, a), reverse=True)))
    return out


def _merge_destinations(parts: tuple[int, ...]) -> set[tuple[int, ...]]:
    out = set()
    for i in range(len(parts)):
        for j in range(i + 1, len(parts)):
            rest = tuple(p for t, p in enumerate(parts) if t not in (i, j))
            out.add(tuple(sorted(rest + (parts[i] + parts[j],), reverse=True)))
    return out


def _exchange_destinations(parts: tuple[int, ...]) -> set[tuple[int, ...]]:
    # one part sheds a to another part, the remainder stays as its own group
    out = set()
    for i, part in enumerate(parts):
        for p in range(len(parts)):
            if p == i:
                continue
            rest = tuple(v for t, v in enumerate(parts) if t not in (i, p))
            for a in range(1, part):
                dest = tuple(sorted(rest + (part - a, parts[p] + a), reverse=True))
                out.add(dest)
    return {d for d in out if d != parts}


def _split_two_merge_destinations(parts: tuple[int, ...]) -> set[tuple[int, ...]]:
    # a part splits in two and both groups merge into two distinct other parts
    out = set()
    for i, part in enumerate(parts):
        if part < 2:
            continue
        rest = parts[:i] + parts[i + 1 :]
        for p in range(len(rest)):
            for q in range(len(rest)):
                if p == q:
                    continue
                remaining = tuple(v for t, v in enumerate(rest) if t not in (p, q))
                for a in range(1, part):
                    dest = tuple(
                        sorted(remaining + (rest[p] + a, rest[q] + part - a), reverse=True)
                    )
                    out.add(dest)
    return out


@dataclass(frozen=True)
class TransitionClass:
    """Expected leading order of a lumped transition (two-parent model)."""

    kind: str  # split | exchange | merge | split-merge | stay | zero
    exponent: int | None
    constant: Fraction | None = None


def classify_transition(source, destination) -> TransitionClass:
    """Appendix-style order class of P(source -> destination) as N grows (m = 2).

    Orders: split (one more group) decays like 1/N; exchange (same group
    count) like 1/N^2; merge of one whole group into another like 1/N^2;
    a split whose two groups both land on existing groups like 1/N^3. The
    stay probability is 1 - C/N with C = sum_mu (1 - 2^(1 - k_mu)), except
    for the all-singleton state, whose leave probability is exactly
    k(k-1)/(N(N-1)).
    """
    source = as_configuration(source)
    destination = as_configuration(destination)
    x, y = source.parts, destination.parts
    if source.total != destination.total:
        raise ValueError("source and destination must partition the same k")
    if y == x:
        k, l = source.total, source.size
        if l == k:
            return TransitionClass("stay", 2, Fraction(k * (k - 1)))
        c = sum(Fraction(1) - Fraction(1, 2 ** (p - 1)) for p in x)
        return TransitionClass("stay", 1, c)
    ly, lx = len(y), len(x)
    if ly == lx + 1:
        if y in _split_destinations(x):
            return TransitionClass("split", 1)
        return TransitionClass("zero", None)
    if ly == lx:
        if y in _exchange_destinations(x):
            return TransitionClass("exchange", 2)
        return TransitionClass("zero", None)
    if ly == lx - 1:
        if y in _merge_destinations(x):
            return TransitionClass("merge", 2)
        if y in _split_two_merge_destinations(x):
            return TransitionClass("split-merge", 3)
        return TransitionClass("zero", None)
    return TransitionClass("zero", None)


@dataclass(frozen=True)
class OrderFit:
    source: Configuration
    destination: Configuration
    expected: TransitionClass
    fitted_exponent: float | None
    fitted_constant: float | None
    values: tuple[float, ...]

    def matches(self, tolerance: float = 0.05) -> bool:
        if self.expected.kind == "zero":
            return all(v == 0.0 for v in self.values)
        if self.fitted_exponent is None:
            return False
        return abs(self.fitted_exponent - self.expected.exponent) <= tolerance


def fit_decay_exponent(n_values, probabilities) -> tuple[float, float, float]:
    """Fit p = c N^(-alpha) exp(b / N) by least squares on log p.

    The b/N nuisance term absorbs the finite-size correction that would
    otherwise bias alpha on moderate N grids.
    """
    n_values = np.asarray(n_values, dtype=np.float64)
    p = np.asarray(probabilities, dtype=np.float64)
    if np.any(p <= 0):
        raise ValueError("probabilities must be positive to fit a decay exponent")
    design = np.column_stack([np.ones_like(n_values), -np.log(n_values), 1.0 / n_values])
    coef, *_ = np.linalg.lstsq(design, np.log(p), rcond=None)
    log_c, alpha, b = coef
    return float(alpha), float(np.exp(log_c)), float(b)


def asymptotic_order_check(source, destination, n_grid, parent_count: int = 2) -> OrderFit:
    """Fit the decay exponent of one lumped transition over an N grid.

    For ``source == destination`` the stay deficit 1 - P is fitted instead.
    """
    source = as_configuration(source)
    destination = as_configuration(destination)
    k = source.total
    n_grid = sorted(int(n) for n in n_grid)
    if len(n_grid) < 4:
        raise ValueError("need at least 4 grid points to fit an exponent")
    if min(n_grid) <= k:
        raise ValueError("all N in the grid must exceed k")
    values = []
    for n in n_grid:
        chain = build_transition_matrix(n, parent_count, k)
        p = chain.probability(source, destination)
        if source.parts == destination.parts:
            p = 1 - p
        values.append(float(p))
    expected = classify_transition(source, destination)
    if any(v == 0.0 for v in values):
        return OrderFit(source, destination, expected, None, None, tuple(values))
    alpha, const, _ = fit_decay_exponent(n_grid, values)
    return OrderFit(source, destination, expected, alpha, const, tuple(values))


@dataclass(frozen=True)
class ScalingRow:
    config: Configuration
    coefficient: Fraction
    scaled_values: tuple[float, ...]
    errors: tuple[float, ...]

    @property
    def converging(self) -> bool:
        return all(b < a for a, b in zip(self.errors, self.errors[1:]))


@dataclass(frozen=True)
class ScalingReport:
    n_grid: tuple[int, ...]
    rows: tuple[ScalingRow, ...]

    @property
    def passed(self) -> bool:
        return all(row.converging for row in self.rows)


def nu_scaling_check(n_grid, k: int, parent_count: int = 2) -> ScalingReport:
    """Check that N^k nu(vector) approaches K(x) for every configuration of k.

    Uses exact chain solves on the grid; errors must shrink monotonically.
    """
    n_grid = sorted(int(n) for n in n_grid)
    if min(n_grid) <= k:
        raise ValueError("all N in the grid must exceed k")
    per_config: dict[tuple[int, ...], list[float]] = {}
    states = None
    for n in n_grid:
        chain = build_transition_matrix(n, parent_count, k)
        nu = stationary_linear(chain)
        states = chain.states
        for state in states:
            scaled = Fraction(n) ** k * lift_to_vector(chain, nu, state)
            per_config.setdefault(state.parts, []).append(float(scaled))
    rows = []
    for state in states:
        coef = limit_coefficient(state, parent_count)
        scaled = per_config[state.parts]
        errors = tuple(abs(v - float(coef)) for v in scaled)
        rows.append(ScalingRow(state, coef, tuple(scaled), errors))
    return ScalingReport(tuple(n_grid), tuple(rows))
