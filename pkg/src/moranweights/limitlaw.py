"""Large-population limit law of a stationary marginal ancestral weight.

An ancestor's marginal weight M converges, as the population grows, to a
mixture: extinction (an atom at zero) with probability 1/m, otherwise an
exponential with rate (m-1)/m (mean m/(m-1)). The law has unit mean and
k-th moment k! (m/(m-1))^(k-1), matching the limit coefficients K({k}) of
the configuration chain; for two parents this is the familiar half-half
mixture with exponential mean 2 and moments 2^(k-1) k!.

The atom is represented explicitly so cdf and distance computations treat
P(M = 0) exactly rather than as a density spike.
"""

from __future__ import annotations

from fractions import Fraction
from math import exp, factorial, log

import numpy as np


class MixtureLaw:
    """Atom at zero plus an exponential component, unit mean."""

    def __init__(self, parent_count: int = 2):
        if parent_count < 2:
            raise ValueError(f"parent_count must be >= 2, got {parent_count}")
        self.parent_count = parent_count
        self.atom_mass = Fraction(1, parent_count)
        self.exponential_mass = Fraction(parent_count - 1, parent_count)
        self.rate = Fraction(parent_count - 1, parent_count)

    def __repr__(self) -> str:
        return f"MixtureLaw(parent_count={self.parent_count})"

    def cdf(self, t):
        """P(M <= t); right-continuous with a jump of atom_mass at 0."""
        t = np.asarray(t, dtype=np.float64)
        atom = float(self.atom_mass)
        weight = float(self.exponential_mass)
        rate = float(self.rate)
        out = np.where(t < 0, 0.0, atom + weight * -np.expm1(-rate * np.maximum(t, 0.0)))
        if out.ndim == 0:
            return float(out)
        return out

    def density(self, t):
        """Density of the continuous part (total mass exponential_mass)."""
        t = np.asarray(t, dtype=np.float64)
        weight = float(self.exponential_mass)
        rate = float(self.rate)
        out = np.where(t < 0, 0.0, weight * rate * np.exp(-rate * np.maximum(t, 0.0)))
        if out.ndim == 0:
            return float(out)
        return out

    def moment(self, k: int) -> Fraction:
        """E[M^k], exact: k! (m/(m-1))^(k-1) for k >= 1."""
        if k < 0:
            raise ValueError(f"moment order must be >= 0, got {k}")
        if k == 0:
            return Fraction(1)
        m = self.parent_count
        return factorial(k) * Fraction(m, m - 1) ** (k - 1)

    def quantile(self, q: float) -> float:
        if not 0 <= q < 1:
            raise ValueError(f"quantile level must be in [0, 1), got {q}")
        atom = float(self.atom_mass)
        if q <= atom:
            return 0.0
        weight = float(self.exponential_mass)
        rate = float(self.rate)
        return -log((1.0 - q) / weight) / rate

    def sample(self, size: int, rng=None) -> np.ndarray:
        """Independent draws; ``rng`` is a seed or numpy Generator."""
        if not isinstance(rng, np.random.Generator):
            rng = np.random.default_rng(rng)
        alive = rng.random(size) >= float(self.atom_mass)
        out = np.zeros(size, dtype=np.float64)
        n_alive = int(alive.sum())
        out[alive] = rng.exponential(scale=1.0 / float(self.rate), size=n_alive)
        return out

    def ks_distance(self, samples) -> float:
        """sup_t |F_n(t) - F(t)| with both one-sided limits at every jump."""
        x = np.sort(np.asarray(samples, dtype=np.float64))
        if x.size == 0:
            raise ValueError("ks_distance needs at least one sample")
        n = x.size
        points = np.unique(np.concatenate([x, [0.0]]))
        f_right = np.asarray(self.cdf(points))
        f_left = f_right - float(self.atom_mass) * (points == 0.0)
        ecdf_right = np.searchsorted(x, points, side="right") / n
        ecdf_left = np.searchsorted(x, points, side="left") / n
        return float(
            max(
                np.abs(ecdf_right - f_right).max(),
                np.abs(ecdf_left - f_left).max(),
            )
        )
