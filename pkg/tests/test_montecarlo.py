import csv
import json

import numpy as np
import pytest

from moranweights.model import ModelConfig, Variant
from moranweights.montecarlo import (
    CheckpointSet,
    ExperimentSpec,
    SampleSet,
    compare_layers,
    run_checkpoint_experiment,
    run_experiment,
    summarize,
    write_summary_json,
)
from moranweights.stationary import joint_moment


def small_spec(**overrides):
    defaults = dict(
        model=ModelConfig(population_size=15, seed=314),
        replicates=400,
        tracked_count=2,
    )
    defaults.update(overrides)
    return ExperimentSpec(**defaults)


def test_spec_validation():
    with pytest.raises(ValueError):
        small_spec(replicates=0)
    with pytest.raises(ValueError):
        small_spec(tracked_count=16)  # exceeds population size
    with pytest.raises(ValueError):
        small_spec(epsilon=0.0)
    with pytest.raises(ValueError):
        small_spec(checkpoints=(10, 10))
    with pytest.raises(ValueError):
        small_spec(checkpoints=(100, 10))


def test_spec_defaults():
    spec = small_spec()
    assert spec.tracked == (1, 2)
    assert spec.resolved_n_max == 100 * 15 * 15
    assert spec.resolved_check_every == 15


def test_run_experiment_is_reproducible():
    spec = small_spec()
    a = run_experiment(spec)
    b = run_experiment(spec)
    assert np.array_equal(a.estimates, b.estimates)
    assert np.array_equal(a.steps, b.steps)
    assert a.backend == b.backend


def test_backends_produce_identical_samples():
    spec = small_spec(replicates=100)
    fast = run_experiment(spec)
    slow = run_experiment(spec, backend="python")
    assert np.array_equal(fast.estimates, slow.estimates)
    assert np.array_equal(fast.steps, slow.steps)


def test_worker_split_does_not_change_results():
    spec = small_spec(replicates=60)
    serial = run_experiment(spec, jobs=1)
    parallel = run_experiment(spec, jobs=3)
    assert np.array_equal(serial.estimates, parallel.estimates)
    assert np.array_equal(serial.converged, parallel.converged)


def test_martingale_mean_and_moments():
    spec = small_spec(replicates=2000)
    samples = run_experiment(spec)
    assert samples.converged_fraction == 1.0
    summary = summarize(samples)
    n = spec.model.population_size
    exact_mean = 1.0
    exact_second = float(joint_moment(n, 2, (2,)))
    for col in range(2):
        lo, hi = summary.moment_cis[1][col]
        assert lo <= exact_mean <= hi
        lo2, hi2 = summary.moment_cis[2][col]
        assert lo2 <= exact_second <= hi2
    lo, hi = summary.product_moment_ci
    assert lo <= float(joint_moment(n, 2, (1, 1))) <= hi


def test_estimates_are_within_population_bounds():
    samples = run_experiment(small_spec(replicates=300))
    assert samples.estimates.min() >= 0.0
    assert samples.estimates.max() <= 15.0
    assert (samples.half_widths <= 15.0 * 1e-9 / 2 + 1e-18).all()


def test_extinct_flag_matches_zero_estimate():
    samples = run_experiment(small_spec(replicates=500))
    extinct = samples.extinct
    assert (samples.estimates[extinct] == 0.0).all()
    assert (samples.estimates[~extinct] > 0.0).all()
    # at N=15 extinction of a single line is common
    assert 0.2 < extinct.mean() < 0.8


def test_samples_csv_layout(tmp_path):
    spec = small_spec(replicates=5)
    samples = run_experiment(spec)
    path = tmp_path / "samples.csv"
    samples.to_csv(path)
    lines = path.read_text().splitlines()
    assert lines[0].startswith("# moranweights ")
    assert "population_size=15" in lines[1]
    assert lines[2] == "replicate,seed,j,M_inf,extinct,converged,steps"
    rows = list(csv.DictReader(lines[2:]))
    assert len(rows) == 5 * 2
    assert rows[0]["replicate"] == "0" and rows[0]["j"] == "1"
    assert rows[1]["j"] == "2"
    assert all(r["seed"] == "314" for r in rows)
    # float round trip through repr is lossless
    assert float(rows[0]["M_inf"]) == samples.estimates[0, 0]


def test_checkpoint_experiment_shapes_and_bounds():
    spec = small_spec(replicates=50, checkpoints=(15, 225, 2250))
    result = run_checkpoint_experiment(spec)
    assert result.marginals.shape == (50, 3, 2)
    assert (result.lower <= result.upper).all()
    # spread bounds shrink along each trajectory
    assert (np.diff(result.lower, axis=1) >= 0).all()
    assert (np.diff(result.upper, axis=1) <= 0).all()
    # marginal stays inside its own certified bounds
    n = spec.model.population_size
    assert (result.marginals >= n * result.lower - 1e-12).all()
    assert (result.marginals <= n * result.upper + 1e-12).all()


def test_checkpoint_requires_checkpoints():
    with pytest.raises(ValueError):
        run_checkpoint_experiment(small_spec())


def test_trajectory_csv(tmp_path):
    spec = small_spec(replicates=3, checkpoints=(10, 100))
    result = run_checkpoint_experiment(spec)
    path = tmp_path / "trajectory.csv"
    result.trajectory_csv(path, replicate=2)
    lines = path.read_text().splitlines()
    assert lines[2] == "n,j,M_n,l_n,L_n"
    rows = list(csv.DictReader(lines[2:]))
    assert [r["n"] for r in rows] == ["10", "10", "100", "100"]
    assert float(rows[0]["M_n"]) == result.marginals[2, 0, 0]


def test_compare_layers_covers_exact_values():
    samples = run_experiment(small_spec(replicates=2000))
    report = compare_layers(samples)
    assert report.passed
    exponent_sets = [row.exponents for row in report.rows]
    assert exponent_sets == [(1,), (2,), (1, 1)]
    for row in report.rows:
        assert row.exact is not None
        assert row.ci[0] <= float(row.exact) <= row.ci[1]


def test_compare_layers_without_exact_reference():
    spec = ExperimentSpec(
        model=ModelConfig(population_size=12, variant=Variant.INDEPENDENT, seed=3),
        replicates=50,
        tracked_count=1,
    )
    report = compare_layers(run_experiment(spec))
    assert all(row.exact is None for row in report.rows)
    assert all(row.ci_covers_exact is None for row in report.rows)
    assert report.passed  # no exact reference means nothing to violate


def test_summary_json_roundtrip(tmp_path):
    spec = small_spec(replicates=30)
    samples = run_experiment(spec)
    summary = summarize(samples)
    path = tmp_path / "summary.json"
    write_summary_json(samples, summary, path)
    doc = json.loads(path.read_text())
    assert doc["meta"]["population_size"] == 15
    assert doc["summary"]["count"] == 30
    assert len(doc["summary"]["moments"]["1"]) == 2
