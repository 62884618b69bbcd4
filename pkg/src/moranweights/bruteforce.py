"""Brute-force labelled particle chains for cross-checking the lumped layer.

Builds the k-particle chain on raw position vectors in [1..N]^k by literal
enumeration of every reproduction event and every parent-slot choice of the
particles on the child, with exact rational probabilities. Nothing here
shares code with the lumped builder, so agreement between the two layers is
a real cross-check:

* the float stationary law (GTH) must be constant across vectors sharing a
  configuration (the exchangeability the lumped chain assumes), and its
  configuration aggregates must match the lumped stationary law;
* the lumped stationary law, lifted to vectors, must satisfy mu P = mu of
  the labelled chain exactly in rational arithmetic, which certifies it is
  the labelled chain's stationary law (irreducibility gives uniqueness).
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from itertools import permutations, product

import numpy as np

from .configchain import LumpedChain, build_transition_matrix, configuration_of
from .stationary import gth_solve, lift_to_vector, stationary_linear


def enumerate_events(population_size: int, parent_count: int) -> list[tuple[int, tuple[int, ...]]]:
    """All distinct-tuple events (child, parents), individuals numbered 1..N."""
    n, m = population_size, parent_count
    if n < m + 1:
        raise ValueError(f"distinct tuples need N >= m + 1, got N={n}, m={m}")
    events = []
    for child in range(1, n + 1):
        others = [i for i in range(1, n + 1) if i != child]
        for parents in permutations(others, m):
            events.append((child, parents))
    return events


@dataclass(frozen=True)
class VectorChain:
    """Exact labelled k-particle chain on position vectors."""

    population_size: int
    parent_count: int
    order: int
    states: tuple[tuple[int, ...], ...]
    matrix: tuple[tuple[Fraction, ...], ...]

    def index(self, state: tuple[int, ...]) -> int:
        return self._index[state]

    def float_matrix(self) -> np.ndarray:
        return np.array([[float(p) for p in row] for row in self.matrix], dtype=np.float64)

    def __post_init__(self):
        object.__setattr__(
            self, "_index", {state: i for i, state in enumerate(self.states)}
        )


def build_vector_chain(population_size: int, parent_count: int, order: int) -> VectorChain:
    """Labelled chain on [1..N]^k by enumerating all events and slot choices."""
    n, m, k = population_size, parent_count, order
    if k < 1:
        raise ValueError(f"order must be >= 1, got {k}")
    events = enumerate_events(n, m)
    event_p = Fraction(1, len(events))
    states = tuple(product(range(1, n + 1), repeat=k))
    index = {state: i for i, state in enumerate(states)}
    matrix = [[Fraction(0)] * len(states) for _ in states]
    for si, state in enumerate(states):
        row = matrix[si]
        for child, parents in events:
            movers = [pos for pos, site in enumerate(state) if site == child]
            if not movers:
                row[si] += event_p
                continue
            # each particle on the child picks a parent slot independently
            choice_p = event_p * Fraction(1, m ** len(movers))
            for choice in product(range(m), repeat=len(movers)):
                dest = list(state)
                for pos, slot in zip(movers, choice):
                    dest[pos] = parents[slot]
                row[index[tuple(dest)]] += choice_p
    for si, row in enumerate(matrix):
        if sum(row) != 1:
            raise AssertionError(f"row {states[si]} does not sum to 1")
    return VectorChain(
        population_size=n,
        parent_count=m,
        order=k,
        states=states,
        matrix=tuple(tuple(row) for row in matrix),
    )


@dataclass(frozen=True)
class LumpingCheck:
    """Outcome of cross-checking the lumped chain against the labelled one."""

    population_size: int
    parent_count: int
    order: int
    max_within_config_spread: float
    max_aggregate_gap: float
    exact_certificate: bool

    def passed(self, tolerance: float = 1e-12) -> bool:
        return (
            self.exact_certificate
            and self.max_within_config_spread <= tolerance
            and self.max_aggregate_gap <= tolerance
        )


def check_lumping(population_size: int, parent_count: int, order: int) -> LumpingCheck:
    """Compare labelled-chain stationary law with the lumped one, both ways."""
    vector_chain = build_vector_chain(population_size, parent_count, order)
    lumped = build_transition_matrix(population_size, parent_count, order)
    nu = stationary_linear(lumped)

    mu_float = gth_solve(vector_chain.float_matrix())

    by_config: dict[tuple[int, ...], list[float]] = {}
    for state, value in zip(vector_chain.states, mu_float):
        by_config.setdefault(configuration_of(state).parts, []).append(float(value))
    spread = max(max(vals) - min(vals) for vals in by_config.values())
    aggregate_gap = max(
        abs(sum(by_config[state.parts]) - float(nu[i]))
        for i, state in enumerate(lumped.states)
    )

    # exact certificate: the lifted lumped law is stationary for the labelled chain
    mu_exact = [
        lift_to_vector(lumped, nu, configuration_of(state))
        for state in vector_chain.states
    ]
    certificate = sum(mu_exact) == 1
    n_states = len(vector_chain.states)
    for j in range(n_states):
        flow = sum(
            mu_exact[i] * vector_chain.matrix[i][j]
            for i in range(n_states)
            if vector_chain.matrix[i][j] != 0
        )
        if flow != mu_exact[j]:
            certificate = False
            break

    return LumpingCheck(
        population_size=population_size,
        parent_count=parent_count,
        order=order,
        max_within_config_spread=spread,
        max_aggregate_gap=aggregate_gap,
        exact_certificate=certificate,
    )
