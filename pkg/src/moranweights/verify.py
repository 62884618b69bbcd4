"""Deterministic consistency suites tying the exact and limit layers together.

Each suite is a batch of named pass/fail checks with no tunable inputs, so
the CLI can run them as a regression gate. Everything here is either an
exact rational identity or a fixed-seed statistical check with wide margins.
"""

from __future__ import annotations

import time
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from .bruteforce import check_lumping
from .configchain import build_transition_matrix
from .limitcoeff import (
    asymptotic_order_check,
    limit_coefficient,
    nu_scaling_check,
    verify_recursion,
)
from .limitlaw import MixtureLaw
from .stationary import moment_of, stationary_linear, stationary_tree_theorem

SUITES = ("recursion", "tree", "asymptotics", "lumping", "limit")


@dataclass(frozen=True)
class Check:
    name: str
    passed: bool
    detail: str


@dataclass(frozen=True)
class SuiteResult:
    suite: str
    checks: tuple[Check, ...]
    elapsed: float

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.checks)

    def to_json_dict(self) -> dict:
        return {
            "suite": self.suite,
            "passed": self.passed,
            "elapsed_seconds": self.elapsed,
            "checks": [
                {"name": c.name, "passed": c.passed, "detail": c.detail} for c in self.checks
            ],
        }


def _suite_recursion() -> list[Check]:
    checks = []
    report = verify_recursion(8)
    by_total: dict[int, list] = {}
    for check in report.checks:
        by_total.setdefault(check.config.total, []).append(check)
    for k in sorted(by_total):
        group = by_total[k]
        ok = all(c.passed for c in group)
        checks.append(
            Check(
                name=f"balance identity, k={k}",
                passed=ok,
                detail=f"{len(group)} configurations, exact rational equality",
            )
        )
    return checks


def _suite_tree() -> list[Check]:
    checks = []
    for n in (6, 10, 20):
        worst = 0.0
        exact_equal = True
        for k in range(1, 5):
            chain = build_transition_matrix(n, 2, k)
            linear = stationary_linear(chain)
            tree = stationary_tree_theorem(chain)
            if linear.probabilities != tree.probabilities:
                exact_equal = False
            gap = float(np.abs(linear.as_floats() - tree.as_floats()).max())
            worst = max(worst, gap)
        checks.append(
            Check(
                name=f"tree theorem matches linear solve, N={n}, k<=4",
                passed=exact_equal and worst <= 1e-10,
                detail=f"exact_equal={exact_equal} max_float_gap={worst:.3e}",
            )
        )
    closed_ok = True
    for n in (3, 5, 10, 50, 100):
        chain = build_transition_matrix(n, 2, 2)
        nu = stationary_linear(chain)
        pair = nu[chain.index((2,))]
        split = nu[chain.index((1, 1))]
        second = moment_of(chain, nu, (2,))
        closed_ok &= pair == Fraction(4, n + 3)
        closed_ok &= split == Fraction(n - 1, n + 3)
        closed_ok &= second == Fraction(4 * n, n + 3)
    checks.append(
        Check(
            name="pair chain closed form, N in {3,5,10,50,100}",
            passed=closed_ok,
            detail="nu({2})=4/(N+3), nu({1,1})=(N-1)/(N+3), E[M^2]=4N/(N+3)",
        )
    )
    return checks


_ORDER_PAIRS = (
    ((2,), (1, 1)),
    ((1, 1), (2,)),
    ((3, 1), (2, 2)),
    ((2, 2, 2), (3, 3)),
    ((2, 1), (2, 1)),
    ((1, 1, 1), (1, 1, 1)),
)

_ORDER_GRID = (16, 32, 64, 128, 256)


def _suite_asymptotics() -> list[Check]:
    checks = []
    for source, destination in _ORDER_PAIRS:
        fit = asymptotic_order_check(source, destination, _ORDER_GRID)
        expected = fit.expected
        if fit.fitted_exponent is None:
            detail = f"kind={expected.kind} all probabilities zero"
        else:
            detail = (
                f"kind={expected.kind} expected={expected.exponent} "
                f"fitted={fit.fitted_exponent:.4f}"
            )
        checks.append(
            Check(
                name=f"decay order {source} -> {destination}",
                passed=fit.matches(0.05),
                detail=detail,
            )
        )
    singleton_ok = True
    for n in _ORDER_GRID[:3]:
        for k in (2, 3, 4):
            chain = build_transition_matrix(n, 2, k)
            state = (1,) * k
            leave = 1 - chain.probability(state, state)
            singleton_ok &= leave == Fraction(k * (k - 1), n * (n - 1))
    checks.append(
        Check(
            name="all-singleton leave probability",
            passed=singleton_ok,
            detail="1 - P(x,x) = k(k-1)/(N(N-1)) exactly, k in {2,3,4}",
        )
    )
    for k in (3, 4):
        report = nu_scaling_check((8, 16, 32, 64), k)
        detail = "; ".join(
            f"{row.config}: {row.scaled_values[-1]:.4f} -> {float(row.coefficient):.4f}"
            for row in report.rows
        )
        checks.append(
            Check(
                name=f"N^k nu scaling approaches coefficients, k={k}",
                passed=report.passed,
                detail=detail,
            )
        )
    return checks


_LUMPING_GRID = ((3, 2, 2), (4, 2, 2), (5, 2, 2), (4, 2, 3), (5, 2, 3), (6, 3, 2), (5, 4, 2))


def _suite_lumping() -> list[Check]:
    checks = []
    for n, m, k in _LUMPING_GRID:
        result = check_lumping(n, m, k)
        checks.append(
            Check(
                name=f"lumped chain vs full vector chain, N={n} m={m} k={k}",
                passed=result.passed(1e-12) and result.exact_certificate,
                detail=(
                    f"spread={result.max_within_config_spread:.2e} "
                    f"gap={result.max_aggregate_gap:.2e} "
                    f"certificate={result.exact_certificate}"
                ),
            )
        )
    return checks


def _suite_limit() -> list[Check]:
    from scipy.integrate import quad

    checks = []
    for m in (2, 3, 4):
        law = MixtureLaw(m)
        coeff_ok = all(
            law.moment(k) == limit_coefficient((k,), m) for k in range(1, 9)
        )
        checks.append(
            Check(
                name=f"law moments equal single-block coefficients, m={m}",
                passed=coeff_ok,
                detail="k! (m/(m-1))^(k-1) for k <= 8, exact",
            )
        )
    for m in (2, 3):
        law = MixtureLaw(m)
        worst = 0.0
        for k in range(1, 7):
            integral, _ = quad(lambda t: t**k * law.density(t), 0, np.inf)
            exact = float(law.moment(k))
            worst = max(worst, abs(integral - exact) / exact)
        checks.append(
            Check(
                name=f"density integrates to the moments, m={m}",
                passed=worst <= 1e-8,
                detail=f"max relative error {worst:.2e} over k <= 6",
            )
        )
    law = MixtureLaw(2)
    grid = np.linspace(0.01, 0.99, 99)
    atom = float(law.atom_mass)
    roundtrip = 0.0
    floor_ok = True
    for q in grid:
        t = law.quantile(float(q))
        if q <= atom:
            floor_ok &= t == 0.0
        else:
            roundtrip = max(roundtrip, abs(float(law.cdf(t)) - q))
    checks.append(
        Check(
            name="quantile inverts the cdf",
            passed=floor_ok and roundtrip <= 1e-12,
            detail=f"atom floor ok={floor_ok}, max |cdf(quantile(q)) - q| = {roundtrip:.2e}",
        )
    )
    rng = np.random.default_rng(20240)
    draws = law.sample(200_000, rng)
    zero_frac = float((draws == 0.0).mean())
    mean = float(draws.mean())
    ks = law.ks_distance(draws)
    checks.append(
        Check(
            name="fixed-seed sampling matches the law",
            passed=abs(zero_frac - atom) <= 0.005 and abs(mean - 1.0) <= 0.015 and ks <= 0.01,
            detail=f"zero_fraction={zero_frac:.4f} mean={mean:.4f} ks={ks:.4f}",
        )
    )
    return checks


_SUITE_FUNCTIONS = {
    "recursion": _suite_recursion,
    "tree": _suite_tree,
    "asymptotics": _suite_asymptotics,
    "lumping": _suite_lumping,
    "limit": _suite_limit,
}


def run_suite(name: str) -> SuiteResult:
    if name not in _SUITE_FUNCTIONS:
        raise ValueError(f"unknown suite {name!r}, choose from {SUITES}")
    start = time.perf_counter()
    checks = _SUITE_FUNCTIONS[name]()
    return SuiteResult(suite=name, checks=tuple(checks), elapsed=time.perf_counter() - start)


def run(names=("all",)) -> list[SuiteResult]:
    requested: list[str] = []
    for name in names:
        if name == "all":
            requested.extend(SUITES)
        else:
            requested.append(name)
    seen = []
    for name in requested:
        if name not in seen:
            seen.append(name)
    return [run_suite(name) for name in seen]


def format_report(results) -> str:
    lines = []
    for result in results:
        mark = "PASS" if result.passed else "FAIL"
        lines.append(f"[{mark}] suite {result.suite} ({result.elapsed:.2f}s)")
        for check in result.checks:
            mark = "pass" if check.passed else "FAIL"
            lines.append(f"  [{mark}] {check.name}: {check.detail}")
    total = sum(len(r.checks) for r in results)
    failed = sum(1 for r in results for c in r.checks if not c.passed)
    lines.append(f"{total - failed}/{total} checks passed")
    return "\n".join(lines)
