"""Lumped particle-configuration chain: exact finite-N transition matrices.

Stationary joint moments of the marginal ancestral weights reduce to the
stationary law of a k-particle system: k particles sit on individuals, and
when a reproduction event replaces a child, every particle on the child
independently moves to one of the m parent slots (distinct individuals
under the distinct-tuple model) while all other particles stay. Tracking
only the multiset of group sizes, an integer partition of k, lumps the
system by exchangeability into a small chain whose transitions this module
computes exactly.

For a source partition (k_1, ..., k_l), one event decomposes as:

* the child is one of the N - l unoccupied individuals: nothing moves;
* the child carries group i: its k_i particles split multinomially over the
  m parent slots, and the occupied slots land injectively on the l - 1
  remaining groups (merging into them) or on fresh individuals, with
  probability (N - l)_f_fresh / (N - 1)_f for f occupied slots, since the
  parent tuple is uniform over ordered distinct tuples avoiding the child.

All probabilities are exact ``fractions.Fraction`` values and every row is
checked to sum to one at build time.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from math import factorial, prod
from typing import Iterator, Sequence

import numpy as np


@dataclass(frozen=True)
class Configuration:
    """An integer partition of k: group sizes in non-increasing order."""

    parts: tuple[int, ...]

    def __post_init__(self):
        parts = tuple(int(p) for p in self.parts)
        object.__setattr__(self, "parts", parts)
        if not parts:
            raise ValueError("a configuration needs at least one part")
        if any(p < 1 for p in parts):
            raise ValueError(f"parts must be positive: {parts}")
        if any(parts[i] < parts[i + 1] for i in range(len(parts) - 1)):
            raise ValueError(f"parts must be non-increasing: {parts}")

    @property
    def total(self) -> int:
        """Particle count k."""
        return sum(self.parts)

    @property
    def size(self) -> int:
        """Occupied-site count l."""
        return len(self.parts)

    @property
    def label(self) -> str:
        return "{" + ",".join(str(p) for p in self.parts) + "}"

    def __iter__(self) -> Iterator[int]:
        return iter(self.parts)

    def __len__(self) -> int:
        return len(self.parts)

    def __str__(self) -> str:
        return self.label


def as_configuration(value) -> Configuration:
    if isinstance(value, Configuration):
        return value
    return Configuration(tuple(sorted((int(v) for v in value), reverse=True)))


def _bounded_partitions(total: int, max_part: int) -> Iterator[tuple[int, ...]]:
    if total == 0:
        yield ()
        return
    for first in range(min(total, max_part), 0, -1):
        for rest in _bounded_partitions(total - first, first):
            yield (first,) + rest


def partitions(k: int) -> list[Configuration]:
    """All integer partitions of k, largest-first parts, reverse-lex order."""
    if k < 1:
        raise ValueError(f"k must be >= 1, got {k}")
    return [Configuration(parts) for parts in _bounded_partitions(k, k)]


def configuration_of(x: Sequence[int]) -> Configuration:
    """Configuration of a vector of individual indices: its multiplicity multiset."""
    if len(x) == 0:
        raise ValueError("empty vector has no configuration")
    counts: dict[int, int] = {}
    for value in x:
        counts[value] = counts.get(value, 0) + 1
    return Configuration(tuple(sorted(counts.values(), reverse=True)))


def falling(n: int, j: int) -> int:
    """Falling factorial n (n-1) ... (n-j+1)."""
    out = 1
    for i in range(j):
        out *= n - i
    return out


def _compositions(total: int, slots: int) -> Iterator[tuple[int, ...]]:
    if slots == 1:
        yield (total,)
        return
    for first in range(total + 1):
        for rest in _compositions(total - first, slots - 1):
            yield (first,) + rest


def _injective_targets(n_groups: int, n_parts: int) -> Iterator[tuple[int | None, ...]]:
    """Maps group index -> other-part index or None (fresh), injective on parts."""
    if n_groups == 0:
        yield ()
        return
    for rest in _injective_targets(n_groups - 1, n_parts):
        used = {t for t in rest if t is not None}
        yield rest + (None,)
        for target in range(n_parts):
            if target not in used:
                yield rest + (target,)


@dataclass(frozen=True)
class LumpedChain:
    """Exact transition matrix of the configuration chain for one (N, m, k)."""

    population_size: int
    parent_count: int
    order: int
    states: tuple[Configuration, ...]
    matrix: tuple[tuple[Fraction, ...], ...]

    def index(self, config) -> int:
        config = as_configuration(config)
        for i, state in enumerate(self.states):
            if state.parts == config.parts:
                return i
        raise KeyError(f"{config.label} is not a partition of {self.order}")

    def probability(self, source, destination) -> Fraction:
        return self.matrix[self.index(source)][self.index(destination)]

    def float_matrix(self) -> np.ndarray:
        return np.array([[float(p) for p in row] for row in self.matrix], dtype=np.float64)

    def is_irreducible(self) -> bool:
        edges = [
            [j for j, p in enumerate(row) if p > 0 and j != i]
            for i, row in enumerate(self.matrix)
        ]
        n = len(self.states)

        def reaches_all(start: int, adjacency) -> bool:
            seen = {start}
            stack = [start]
            while stack:
                for nxt in adjacency[stack.pop()]:
                    if nxt not in seen:
                        seen.add(nxt)
                        stack.append(nxt)
            return len(seen) == n

        reverse = [[] for _ in range(n)]
        for i, outs in enumerate(edges):
            for j in outs:
                reverse[j].append(i)
        return reaches_all(0, edges) and reaches_all(0, reverse)


def build_transition_matrix(population_size: int, parent_count: int, order: int) -> LumpedChain:
    """Exact lumped chain over partitions of ``order`` (distinct-tuple model)."""
    n, m, k = population_size, parent_count, order
    if k < 1:
        raise ValueError(f"order must be >= 1, got {k}")
    if m < 2:
        raise ValueError(f"parent_count must be >= 2, got {m}")
    if n <= k:
        raise ValueError(f"population_size must exceed order, got N={n}, k={k}")
    if n < m + 1:
        raise ValueError(f"distinct tuples need N >= m + 1, got N={n}, m={m}")

    states = partitions(k)
    index = {state.parts: i for i, state in enumerate(states)}
    matrix = [[Fraction(0)] * len(states) for _ in states]

    for si, state in enumerate(states):
        parts = state.parts
        l = len(parts)
        row = matrix[si]
        # child unoccupied: nothing moves
        row[si] += Fraction(n - l, n)
        for i, k_i in enumerate(parts):
            others = parts[:i] + parts[i + 1 :]
            child_p = Fraction(1, n)
            for split in _compositions(k_i, m):
                split_p = Fraction(
                    factorial(k_i) // prod(factorial(a) for a in split),
                    m**k_i,
                )
                groups = [a for a in split if a > 0]
                f = len(groups)
                for targets in _injective_targets(f, l - 1):
                    merged = sum(1 for t in targets if t is not None)
                    assign_p = Fraction(falling(n - l, f - merged), falling(n - 1, f))
                    if assign_p == 0:
                        continue
                    dest = list(others)
                    for g, target in zip(groups, targets):
                        if target is None:
                            dest.append(g)
                        else:
                            dest[target] += g
                    di = index[tuple(sorted(dest, reverse=True))]
                    row[di] += child_p * split_p * assign_p

    for si, row in enumerate(matrix):
        total = sum(row)
        if total != 1:
            raise AssertionError(
                f"row {states[si].label} sums to {total}, not 1"
            )
        if any(p < 0 or p > 1 for p in row):
            raise AssertionError(f"row {states[si].label} has entries outside [0,1]")

    return LumpedChain(
        population_size=n,
        parent_count=m,
        order=k,
        states=tuple(states),
        matrix=tuple(tuple(row) for row in matrix),
    )
