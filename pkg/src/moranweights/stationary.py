"""Stationary laws of the lumped chain and the moments they encode.

Three independent solvers cross-check each other: an exact rational linear
solve, the Markov-chain tree theorem (principal cofactors of I - P, again
rational), and float power iteration. The stationary law lifts to labelled
particle vectors through exchangeability, which turns it into stationary
joint moments of the marginal ancestral weights.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from math import factorial, prod

import numpy as np

from .configchain import LumpedChain, as_configuration, build_transition_matrix, falling


@dataclass(frozen=True)
class StationaryResult:
    """A stationary probability vector over a chain's states."""

    probabilities: tuple
    method: str
    residual: object  # Fraction for exact methods, float otherwise

    def __getitem__(self, i: int):
        return self.probabilities[i]

    def __len__(self) -> int:
        return len(self.probabilities)

    def as_floats(self) -> np.ndarray:
        return np.array([float(p) for p in self.probabilities], dtype=np.float64)


def _residual_exact(chain: LumpedChain, nu: list[Fraction]) -> Fraction:
    worst = Fraction(0)
    for j in range(len(nu)):
        flow = sum(nu[i] * chain.matrix[i][j] for i in range(len(nu)))
        gap = abs(flow - nu[j])
        if gap > worst:
            worst = gap
    return worst


def _solve_rational(rows: list[list[Fraction]], rhs: list[Fraction]) -> list[Fraction]:
    """Gaussian elimination with exact fractions; raises on singular systems."""
    n = len(rows)
    a = [row[:] + [rhs[i]] for i, row in enumerate(rows)]
    for col in range(n):
        pivot = next((r for r in range(col, n) if a[r][col] != 0), None)
        if pivot is None:
            raise ZeroDivisionError("singular system")
        a[col], a[pivot] = a[pivot], a[col]
        inv = a[col][col]
        a[col] = [v / inv for v in a[col]]
        for r in range(n):
            if r != col and a[r][col] != 0:
                factor = a[r][col]
                a[r] = [v - factor * w for v, w in zip(a[r], a[col])]
    return [a[r][n] for r in range(n)]


def stationary_linear(chain: LumpedChain) -> StationaryResult:
    """Exact stationary law from the balance equations nu P = nu, sum nu = 1."""
    if not chain.is_irreducible():
        raise ValueError("chain is reducible; stationary law is not unique")
    n = len(chain.states)
    # rows of (P^T - I) nu = 0 with the last equation replaced by sum = 1
    rows = [
        [chain.matrix[j][i] - (1 if i == j else 0) for j in range(n)]
        for i in range(n)
    ]
    rows[n - 1] = [Fraction(1)] * n
    rhs = [Fraction(0)] * (n - 1) + [Fraction(1)]
    nu = _solve_rational(rows, rhs)
    if any(p < 0 for p in nu):
        raise AssertionError("negative stationary probability")
    return StationaryResult(tuple(nu), "linear-solve", _residual_exact(chain, nu))


def _determinant(rows: list[list[Fraction]]) -> Fraction:
    n = len(rows)
    a = [row[:] for row in rows]
    det = Fraction(1)
    for col in range(n):
        pivot = next((r for r in range(col, n) if a[r][col] != 0), None)
        if pivot is None:
            return Fraction(0)
        if pivot != col:
            a[col], a[pivot] = a[pivot], a[col]
            det = -det
        det *= a[col][col]
        inv = a[col][col]
        for r in range(col + 1, n):
            if a[r][col] != 0:
                factor = a[r][col] / inv
                a[r] = [v - factor * w for v, w in zip(a[r], a[col])]
    return det


def stationary_tree_theorem(chain: LumpedChain) -> StationaryResult:
    """Stationary law via the Markov-chain tree theorem.

    The weight of state i, the sum over spanning in-trees rooted at i of
    the product of arrow probabilities, equals the principal cofactor of
    the Laplacian I - P with row and column i removed.
    """
    n = len(chain.states)
    if n > 100:
        raise ValueError(f"tree-theorem solver limited to 100 states, got {n}")
    if n == 1:
        return StationaryResult((Fraction(1),), "tree-theorem", Fraction(0))
    laplacian = [
        [(1 if i == j else 0) - chain.matrix[i][j] for j in range(n)]
        for i in range(n)
    ]
    weights = []
    for i in range(n):
        minor = [
            [laplacian[r][c] for c in range(n) if c != i]
            for r in range(n)
            if r != i
        ]
        weights.append(_determinant(minor))
    total = sum(weights)
    if total <= 0 or any(w < 0 for w in weights):
        raise AssertionError("tree weights must be positive for an irreducible chain")
    nu = [w / total for w in weights]
    return StationaryResult(tuple(nu), "tree-theorem", _residual_exact(chain, nu))


def stationary_power(chain: LumpedChain, tol: float = 1e-14, max_iter: int = 1_000_000) -> StationaryResult:
    """Float power iteration; the chain's stay probabilities make it aperiodic."""
    p = chain.float_matrix()
    n = p.shape[0]
    nu = np.full(n, 1.0 / n)
    for _ in range(max_iter):
        nxt = nu @ p
        nxt /= nxt.sum()
        if np.abs(nxt - nu).sum() < tol:
            nu = nxt
            break
        nu = nxt
    residual = float(np.abs(nu @ p - nu).max())
    return StationaryResult(tuple(float(v) for v in nu), "power-iteration", residual)


def gth_solve(p: np.ndarray) -> np.ndarray:
    """Stationary vector of a row-stochastic matrix by GTH elimination.

    Subtraction-free state reduction; backward stable, so it serves as the
    float oracle for the brute-force chains.
    """
    a = np.array(p, dtype=np.float64, copy=True)
    n = a.shape[0]
    for step in range(n - 1, 0, -1):
        scale = a[step, :step].sum()
        if scale <= 0:
            raise ValueError("reducible chain in GTH elimination")
        a[:step, step] /= scale
        for r in range(step):
            a[r, :step] += a[r, step] * a[step, :step]
    out = np.zeros(n)
    out[0] = 1.0
    for step in range(1, n):
        out[step] = out[:step] @ a[:step, step]
    return out / out.sum()


def set_partition_count(config) -> int:
    """Count of set partitions of k labelled particles with these block sizes."""
    config = as_configuration(config)
    mult: dict[int, int] = {}
    for part in config.parts:
        mult[part] = mult.get(part, 0) + 1
    return factorial(config.total) // (
        prod(factorial(p) for p in config.parts) * prod(factorial(c) for c in mult.values())
    )


def lift_to_vector(chain: LumpedChain, nu, config) -> Fraction:
    """Stationary probability of one labelled particle vector with this configuration.

    The nu mass of a configuration spreads uniformly over its
    set_partition_count(config) * (N)_l labelled vectors.
    """
    config = as_configuration(config)
    value = nu[chain.index(config)]
    vectors = set_partition_count(config) * falling(chain.population_size, config.size)
    return Fraction(value) / vectors


def moment_of(chain: LumpedChain, nu, exponents) -> Fraction:
    """Exact stationary joint moment E[prod_j M(j)^{k_j}] from a solved chain."""
    config = as_configuration(exponents)
    return chain.population_size ** config.total * lift_to_vector(chain, nu, config)


def joint_moment(population_size: int, parent_count: int, exponents) -> Fraction:
    """Exact stationary joint moment of the marginal weights of distinct ancestors."""
    config = as_configuration(exponents)
    chain = build_transition_matrix(population_size, parent_count, config.total)
    nu = stationary_linear(chain)
    return moment_of(chain, nu, config)


def moment_table(chain: LumpedChain, nu) -> dict[str, Fraction]:
    """Joint moment for every configuration of the chain, keyed by label."""
    return {
        state.label: moment_of(chain, nu, state)
        for state in chain.states
    }
