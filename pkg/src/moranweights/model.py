"""Multi-parent Moran model: reproduction events and pedigrees.

A population of N individuals evolves in discrete steps. At each step m
parents and one child are chosen; the child's row is replaced while every
other individual persists. Two tuple variants are supported:

* ``distinct``: the m + 1 positions (parents and child) are drawn uniformly
  among all tuples of pairwise distinct individuals.
* ``independent``: all m + 1 positions are drawn independently and uniformly,
  so parents may repeat and the child may be one of its own parents.

Individuals are labelled 1..N in the public interface.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass, field
from enum import Enum
from pathlib import Path
from typing import Iterator

from .randomness import RawStream, bit_generator


class Variant(str, Enum):
    DISTINCT = "distinct"
    INDEPENDENT = "independent"


VARIANT_CODES = {Variant.DISTINCT: 0, Variant.INDEPENDENT: 1}


@dataclass(frozen=True)
class ModelConfig:
    """Parameters of one model instance."""

    population_size: int
    parent_count: int = 2
    variant: Variant = Variant.DISTINCT
    seed: int = 0

    def __post_init__(self):
        object.__setattr__(self, "variant", Variant(self.variant))
        n, m = self.population_size, self.parent_count
        if m < 2:
            raise ValueError(f"parent_count must be >= 2, got {m}")
        if m > 63:
            raise ValueError(f"parent_count must be <= 63, got {m}")
        if self.variant is Variant.DISTINCT:
            if n < m + 1:
                raise ValueError(
                    f"distinct tuples need population_size >= parent_count + 1, "
                    f"got N={n}, m={m}"
                )
        elif n < 1:
            raise ValueError(f"population_size must be >= 1, got {n}")
        if not 0 <= self.seed < 2**64:
            raise ValueError(f"seed must be in [0, 2**64), got {self.seed}")

    @property
    def variant_code(self) -> int:
        return VARIANT_CODES[self.variant]


@dataclass(frozen=True)
class ReproductionEvent:
    """One replacement: at step ``time`` the ``child`` is reborn to ``parents``.

    ``parents`` keeps slot order (the order in which the slots were drawn);
    under the independent variant the same individual may occupy several
    slots and each occurrence contributes to the average separately.
    """

    time: int
    child: int
    parents: tuple[int, ...]

    def __post_init__(self):
        if self.time < 0:
            raise ValueError(f"time must be >= 0, got {self.time}")
        if not self.parents:
            raise ValueError("parents must be non-empty")
        if self.child < 1 or any(p < 1 for p in self.parents):
            raise ValueError(f"individuals are 1-based: child={self.child}, parents={self.parents}")


@dataclass
class Pedigree:
    """A realised event sequence for one model instance."""

    config: ModelConfig
    events: list[ReproductionEvent] = field(default_factory=list)

    def __iter__(self) -> Iterator[ReproductionEvent]:
        return iter(self.events)

    def __len__(self) -> int:
        return len(self.events)

    def to_csv(self, path: str | Path) -> None:
        m = self.config.parent_count
        header = ["t", "child"] + [f"parent{s}" for s in range(1, m + 1)]
        with open(path, "w", newline="") as handle:
            writer = csv.writer(handle)
            writer.writerow(header)
            for event in self.events:
                writer.writerow([event.time, event.child, *event.parents])

    @classmethod
    def from_csv(cls, path: str | Path, config: ModelConfig) -> "Pedigree":
        events = []
        with open(path, newline="") as handle:
            reader = csv.reader(handle)
            header = next(reader)
            if header[:2] != ["t", "child"]:
                raise ValueError(f"unexpected pedigree header: {header}")
            for row in reader:
                time, child, *parents = (int(cell) for cell in row)
                events.append(ReproductionEvent(time, child, tuple(parents)))
        return cls(config, events)


def sample_event(config: ModelConfig, time: int, rng: RawStream) -> ReproductionEvent:
    """Draw one reproduction event.

    Slots are drawn parent1, ..., parentm, child, each by masked rejection
    on [0, N); under the distinct variant a slot colliding with an earlier
    slot of the same event is redrawn. The compiled kernel replays exactly
    this consumption order.
    """
    n, m = config.population_size, config.parent_count
    slots: list[int] = []
    for _ in range(m + 1):
        value = rng.below(n)
        if config.variant is Variant.DISTINCT:
            while value in slots:
                value = rng.below(n)
        slots.append(value)
    parents = tuple(s + 1 for s in slots[:m])
    return ReproductionEvent(time=time, child=slots[m] + 1, parents=parents)


def generate_pedigree(config: ModelConfig, n_steps: int, rng: RawStream | None = None) -> Pedigree:
    """Sample ``n_steps`` events (times 0 .. n_steps - 1) from one stream."""
    if n_steps < 0:
        raise ValueError(f"n_steps must be >= 0, got {n_steps}")
    if rng is None:
        rng = RawStream(bit_generator(config.seed))
    events = [sample_event(config, t, rng) for t in range(n_steps)]
    return Pedigree(config, events)
