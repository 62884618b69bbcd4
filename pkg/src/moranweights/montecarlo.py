"""Replicate harness: many independent runs, aggregated and compared.

Replicate r draws its bit generator from the master seed with spawn key
(r,), so any replicate is reproducible in isolation and results do not
depend on how replicates are distributed over workers. Aggregation uses a
fixed reduction order (replicate index), making summaries bit-reproducible.
"""

from __future__ import annotations

import csv
import json
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from fractions import Fraction
from pathlib import Path

import numpy as np

from . import __version__, kernel
from .limitlaw import MixtureLaw
from .model import ModelConfig, Variant
from .randomness import RNG_ALGORITHM, seed_sequence
from .stationary import joint_moment
from .weights import DEFAULT_EPSILON, default_n_max, monotone_slack


@dataclass(frozen=True)
class ExperimentSpec:
    """One batch of independent replicates of the same model."""

    model: ModelConfig
    replicates: int = 1000
    tracked_count: int = 1
    epsilon: float = DEFAULT_EPSILON
    n_max: int | None = None
    check_every: int | None = None
    checkpoints: tuple[int, ...] = ()

    def __post_init__(self):
        if self.replicates < 1:
            raise ValueError(f"replicates must be >= 1, got {self.replicates}")
        if not 1 <= self.tracked_count <= self.model.population_size:
            raise ValueError(
                f"tracked_count must be in [1, {self.model.population_size}], "
                f"got {self.tracked_count}"
            )
        if self.epsilon <= 0:
            raise ValueError(f"epsilon must be > 0, got {self.epsilon}")
        if self.n_max is not None and self.n_max < 1:
            raise ValueError(f"n_max must be >= 1, got {self.n_max}")
        object.__setattr__(self, "checkpoints", tuple(int(c) for c in self.checkpoints))
        if any(b <= a for a, b in zip(self.checkpoints, self.checkpoints[1:])):
            raise ValueError(f"checkpoints must be strictly ascending: {self.checkpoints}")

    @property
    def tracked(self) -> tuple[int, ...]:
        return tuple(range(1, self.tracked_count + 1))

    @property
    def resolved_n_max(self) -> int:
        if self.n_max is not None:
            return self.n_max
        return default_n_max(self.model.population_size)

    @property
    def resolved_check_every(self) -> int:
        if self.check_every is not None:
            return self.check_every
        return self.model.population_size

    def metadata(self) -> dict:
        return {
            "version": __version__,
            "rng": RNG_ALGORITHM,
            "population_size": self.model.population_size,
            "parent_count": self.model.parent_count,
            "variant": self.model.variant.value,
            "master_seed": self.model.seed,
            "replicates": self.replicates,
            "tracked_count": self.tracked_count,
            "epsilon": self.epsilon,
            "n_max": self.resolved_n_max,
            "check_every": self.resolved_check_every,
            "checkpoints": list(self.checkpoints),
        }


def _metadata_lines(meta: dict) -> list[str]:
    pairs = " ".join(f"{key}={value}" for key, value in meta.items() if key != "checkpoints")
    return [f"# moranweights {meta['version']}", f"# {pairs}"]


@dataclass
class SampleSet:
    """Limiting-weight estimates from independent convergence runs."""

    spec: ExperimentSpec
    estimates: np.ndarray  # (replicates, tracked) midpoint estimates of M_inf
    half_widths: np.ndarray  # certified error bounds on the estimates
    extinct: np.ndarray  # (replicates, tracked) bool
    converged: np.ndarray  # (replicates,) bool
    steps: np.ndarray  # (replicates,) events consumed
    backend: str

    def __post_init__(self):
        n = self.spec.model.population_size
        if self.estimates.min() < 0 or self.estimates.max() > n:
            raise AssertionError("marginal weight estimates must lie in [0, N]")

    @property
    def converged_fraction(self) -> float:
        return float(self.converged.mean())

    def to_csv(self, path) -> None:
        meta = self.spec.metadata()
        meta["backend"] = self.backend
        with open(path, "w", newline="") as handle:
            for line in _metadata_lines(meta):
                handle.write(line + "\n")
            writer = csv.writer(handle)
            writer.writerow(["replicate", "seed", "j", "M_inf", "extinct", "converged", "steps"])
            for r in range(self.spec.replicates):
                for col, j in enumerate(self.spec.tracked):
                    writer.writerow(
                        [
                            r,
                            self.spec.model.seed,
                            j,
                            repr(float(self.estimates[r, col])),
                            int(self.extinct[r, col]),
                            int(self.converged[r]),
                            int(self.steps[r]),
                        ]
                    )


@dataclass
class CheckpointSet:
    """Marginals and spread bounds recorded at fixed event counts."""

    spec: ExperimentSpec
    marginals: np.ndarray  # (replicates, checkpoints, tracked)
    lower: np.ndarray
    upper: np.ndarray
    backend: str

    def trajectory_csv(self, path, replicate: int = 0) -> None:
        meta = self.spec.metadata()
        meta["backend"] = self.backend
        meta["replicate"] = replicate
        with open(path, "w", newline="") as handle:
            for line in _metadata_lines(meta):
                handle.write(line + "\n")
            writer = csv.writer(handle)
            writer.writerow(["n", "j", "M_n", "l_n", "L_n"])
            for c, n in enumerate(self.spec.checkpoints):
                for col, j in enumerate(self.spec.tracked):
                    writer.writerow(
                        [
                            n,
                            j,
                            repr(float(self.marginals[replicate, c, col])),
                            repr(float(self.lower[replicate, c, col])),
                            repr(float(self.upper[replicate, c, col])),
                        ]
                    )


def _replicate_args(spec: ExperimentSpec):
    model = spec.model
    tracked0 = np.asarray([j - 1 for j in spec.tracked], dtype=np.int64)
    return model, tracked0, monotone_slack(model.parent_count)


def _run_convergence_chunk(spec: ExperimentSpec, backend: str | None, start: int, stop: int):
    impl = kernel.get_backend(backend)
    model, tracked0, slack = _replicate_args(spec)
    count = stop - start
    width = spec.tracked_count
    estimates = np.empty((count, width))
    half_widths = np.empty((count, width))
    extinct = np.empty((count, width), dtype=bool)
    converged = np.empty(count, dtype=bool)
    steps = np.empty(count, dtype=np.int64)
    for offset, r in enumerate(range(start, stop)):
        bg = np.random.PCG64(seed_sequence(model.seed, r))
        try:
            lower, upper, used = impl.run_replicate(
                bg,
                model.population_size,
                model.parent_count,
                model.variant_code,
                tracked0,
                spec.epsilon,
                spec.resolved_n_max,
                spec.resolved_check_every,
                slack,
            )
        except Exception as exc:
            raise RuntimeError(f"replicate {r} failed: {exc}") from exc
        n = model.population_size
        estimates[offset] = 0.5 * n * (lower + upper)
        half_widths[offset] = 0.5 * n * (upper - lower)
        extinct[offset] = upper == 0.0
        spread = upper - lower
        converged[offset] = bool(spread.max() <= spec.epsilon)
        steps[offset] = used
    return estimates, half_widths, extinct, converged, steps


def _run_checkpoint_chunk(spec: ExperimentSpec, backend: str | None, start: int, stop: int):
    impl = kernel.get_backend(backend)
    model, tracked0, slack = _replicate_args(spec)
    checkpoints = np.asarray(spec.checkpoints, dtype=np.int64)
    count = stop - start
    shape = (count, len(spec.checkpoints), spec.tracked_count)
    marginals = np.empty(shape)
    lower = np.empty(shape)
    upper = np.empty(shape)
    for offset, r in enumerate(range(start, stop)):
        bg = np.random.PCG64(seed_sequence(model.seed, r))
        try:
            marg, lo, hi = impl.run_checkpoints(
                bg,
                model.population_size,
                model.parent_count,
                model.variant_code,
                tracked0,
                checkpoints,
                slack,
            )
        except Exception as exc:
            raise RuntimeError(f"replicate {r} failed: {exc}") from exc
        marginals[offset] = marg
        lower[offset] = lo
        upper[offset] = hi
    return marginals, lower, upper


def _chunks(total: int, jobs: int) -> list[tuple[int, int]]:
    size = max(1, -(-total // jobs))
    return [(start, min(start + size, total)) for start in range(0, total, size)]


def run_experiment(spec: ExperimentSpec, jobs: int = 1, backend: str | None = None) -> SampleSet:
    """Independent convergence runs for every replicate."""
    backend_name = backend or kernel.BACKEND
    if jobs <= 1:
        parts = [_run_convergence_chunk(spec, backend_name, 0, spec.replicates)]
    else:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            futures = [
                pool.submit(_run_convergence_chunk, spec, backend_name, start, stop)
                for start, stop in _chunks(spec.replicates, jobs)
            ]
            parts = [f.result() for f in futures]
    estimates, half_widths, extinct, converged, steps = (
        np.concatenate([p[i] for p in parts]) for i in range(5)
    )
    return SampleSet(
        spec=spec,
        estimates=estimates,
        half_widths=half_widths,
        extinct=extinct,
        converged=converged,
        steps=steps,
        backend=backend_name,
    )


def run_checkpoint_experiment(
    spec: ExperimentSpec, jobs: int = 1, backend: str | None = None
) -> CheckpointSet:
    """Record marginals and bounds at the requested checkpoints for every replicate."""
    if not spec.checkpoints:
        raise ValueError("spec.checkpoints is empty")
    backend_name = backend or kernel.BACKEND
    if jobs <= 1:
        parts = [_run_checkpoint_chunk(spec, backend_name, 0, spec.replicates)]
    else:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            futures = [
                pool.submit(_run_checkpoint_chunk, spec, backend_name, start, stop)
                for start, stop in _chunks(spec.replicates, jobs)
            ]
            parts = [f.result() for f in futures]
    marginals, lower, upper = (np.concatenate([p[i] for p in parts]) for i in range(3))
    return CheckpointSet(
        spec=spec, marginals=marginals, lower=lower, upper=upper, backend=backend_name
    )


def _frac_str(value: Fraction) -> str:
    return f"{value.numerator}/{value.denominator}"


def _bootstrap_ci(values: np.ndarray, stat, resamples: int, level: float, seed: int):
    rng = np.random.default_rng(seed)
    n = values.shape[0]
    stats = np.empty(resamples)
    for b in range(resamples):
        idx = rng.integers(0, n, size=n)
        stats[b] = stat(values[idx])
    alpha = (1.0 - level) / 2.0
    return float(np.quantile(stats, alpha)), float(np.quantile(stats, 1.0 - alpha))


@dataclass
class Summary:
    """Aggregate statistics of a SampleSet with bootstrap intervals."""

    count: int
    converged_fraction: float
    mean_steps: float
    moments: dict  # k -> per-ancestor sample moments, np.ndarray (tracked,)
    moment_cis: dict  # k -> np.ndarray (tracked, 2)
    product_moment: float | None  # E[M(1) M(2)] when two ancestors are tracked
    product_moment_ci: tuple[float, float] | None
    zero_fraction: np.ndarray
    zero_fraction_ci: np.ndarray
    covariance: np.ndarray
    ks_to_limit: np.ndarray
    ci_level: float

    def to_json_dict(self) -> dict:
        return {
            "count": self.count,
            "converged_fraction": self.converged_fraction,
            "mean_steps": self.mean_steps,
            "ci_level": self.ci_level,
            "moments": {str(k): list(map(float, v)) for k, v in self.moments.items()},
            "moment_cis": {
                str(k): [[float(a), float(b)] for a, b in v] for k, v in self.moment_cis.items()
            },
            "product_moment": self.product_moment,
            "product_moment_ci": list(self.product_moment_ci)
            if self.product_moment_ci is not None
            else None,
            "zero_fraction": list(map(float, self.zero_fraction)),
            "zero_fraction_ci": [[float(a), float(b)] for a, b in self.zero_fraction_ci],
            "covariance": [[float(v) for v in row] for row in self.covariance],
            "ks_to_limit": list(map(float, self.ks_to_limit)),
        }


def summarize(
    samples: SampleSet,
    k_max: int = 2,
    resamples: int = 400,
    ci_level: float = 0.99,
    bootstrap_seed: int = 0,
) -> Summary:
    """Sample moments, extinction frequency, and limit-law distance."""
    est = samples.estimates
    law = MixtureLaw(samples.spec.model.parent_count)
    moments = {}
    moment_cis = {}
    for k in range(1, k_max + 1):
        moments[k] = (est**k).mean(axis=0)
        moment_cis[k] = np.array(
            [
                _bootstrap_ci(est[:, col] ** k, np.mean, resamples, ci_level, bootstrap_seed)
                for col in range(est.shape[1])
            ]
        )
    product_moment = None
    product_ci = None
    if est.shape[1] >= 2:
        prod = est[:, 0] * est[:, 1]
        product_moment = float(prod.mean())
        product_ci = _bootstrap_ci(prod, np.mean, resamples, ci_level, bootstrap_seed)
    zero = samples.extinct.astype(np.float64)
    zero_ci = np.array(
        [
            _bootstrap_ci(zero[:, col], np.mean, resamples, ci_level, bootstrap_seed)
            for col in range(zero.shape[1])
        ]
    )
    return Summary(
        count=samples.spec.replicates,
        converged_fraction=samples.converged_fraction,
        mean_steps=float(samples.steps.mean()),
        moments=moments,
        moment_cis=moment_cis,
        product_moment=product_moment,
        product_moment_ci=product_ci,
        zero_fraction=zero.mean(axis=0),
        zero_fraction_ci=zero_ci,
        covariance=np.cov(est, rowvar=False).reshape(est.shape[1], est.shape[1]),
        ks_to_limit=np.array([law.ks_distance(est[:, col]) for col in range(est.shape[1])]),
        ci_level=ci_level,
    )


@dataclass(frozen=True)
class LayerRow:
    """One moment compared across simulation, exact chain, and limit law."""

    exponents: tuple[int, ...]
    monte_carlo: float
    ci: tuple[float, float]
    exact: Fraction | None
    limit: Fraction
    ci_covers_exact: bool | None


@dataclass(frozen=True)
class LayerReport:
    rows: tuple[LayerRow, ...]

    @property
    def passed(self) -> bool:
        return all(row.ci_covers_exact is not False for row in self.rows)

    def to_json_dict(self) -> dict:
        return {
            "rows": [
                {
                    "exponents": list(row.exponents),
                    "monte_carlo": row.monte_carlo,
                    "ci": list(row.ci),
                    "exact": _frac_str(row.exact) if row.exact is not None else None,
                    "exact_float": float(row.exact) if row.exact is not None else None,
                    "limit": _frac_str(row.limit),
                    "limit_float": float(row.limit),
                    "ci_covers_exact": row.ci_covers_exact,
                }
                for row in self.rows
            ],
            "passed": self.passed,
        }


def compare_layers(
    samples: SampleSet,
    k_max: int = 2,
    resamples: int = 400,
    ci_level: float = 0.99,
    bootstrap_seed: int = 0,
) -> LayerReport:
    """Monte Carlo vs exact finite-N vs limit, one row per moment."""
    spec = samples.spec
    model = spec.model
    law = MixtureLaw(model.parent_count)
    exact_available = (
        model.variant is Variant.DISTINCT and model.population_size > k_max
    )
    exponent_sets: list[tuple[int, ...]] = [(k,) for k in range(1, k_max + 1)]
    if spec.tracked_count >= 2:
        exponent_sets.append((1, 1))
    rows = []
    for exponents in exponent_sets:
        if len(exponents) == 1:
            values = samples.estimates[:, 0] ** exponents[0]
        else:
            values = samples.estimates[:, 0] * samples.estimates[:, 1]
        mc = float(values.mean())
        ci = _bootstrap_ci(values, np.mean, resamples, ci_level, bootstrap_seed)
        exact = (
            joint_moment(model.population_size, model.parent_count, exponents)
            if exact_available
            else None
        )
        limit = Fraction(1)
        for k in exponents:
            limit *= law.moment(k)
        covers = None
        if exact is not None:
            covers = bool(ci[0] <= float(exact) <= ci[1])
        rows.append(
            LayerRow(
                exponents=tuple(exponents),
                monte_carlo=mc,
                ci=ci,
                exact=exact,
                limit=limit,
                ci_covers_exact=covers,
            )
        )
    return LayerReport(tuple(rows))


def write_summary_json(
    samples: SampleSet, summary: Summary, path, extra: dict | None = None
) -> None:
    meta = samples.spec.metadata()
    meta["backend"] = samples.backend
    payload = {"meta": meta, "summary": summary.to_json_dict()}
    if extra:
        payload.update(extra)
    Path(path).write_text(json.dumps(payload, indent=2) + "\n")
