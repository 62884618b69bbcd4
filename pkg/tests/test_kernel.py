import os
import subprocess
import sys

import numpy as np
import pytest

from moranweights import kernel
from moranweights.randomness import seed_sequence
from moranweights.weights import monotone_slack

HAS_CYTHON = "cython" in kernel.available_backends()

pytestmark = pytest.mark.skipif(
    not HAS_CYTHON, reason="compiled kernel unavailable, nothing to compare"
)

CONFIGS = [
    (10, 2, 0),
    (10, 2, 1),
    (7, 3, 0),
    (7, 3, 1),
    (5, 4, 0),
    (64, 2, 0),
]


@pytest.mark.parametrize("n,m,variant", CONFIGS)
def test_sample_events_bit_identical(n, m, variant):
    py = kernel.get_backend("python")
    cy = kernel.get_backend("cython")
    a = py.sample_events(np.random.PCG64(seed_sequence(9)), n, m, variant, 5000)
    b = cy.sample_events(np.random.PCG64(seed_sequence(9)), n, m, variant, 5000)
    assert np.array_equal(a, b)
    assert a.dtype == np.int64 and a.shape == (5000, m + 1)


@pytest.mark.parametrize("n,m,variant", CONFIGS[:4])
def test_run_replicate_bit_identical(n, m, variant):
    py = kernel.get_backend("python")
    cy = kernel.get_backend("cython")
    tracked = np.asarray([0, 1], dtype=np.int64)
    slack = monotone_slack(m)
    args = (n, m, variant, tracked, 1e-9, 100 * n * n, n, slack)
    la, ua, sa = py.run_replicate(np.random.PCG64(seed_sequence(4, 0)), *args)
    lb, ub, sb = cy.run_replicate(np.random.PCG64(seed_sequence(4, 0)), *args)
    assert sa == sb
    assert np.array_equal(la, lb)
    assert np.array_equal(ua, ub)


def test_run_checkpoints_bit_identical():
    py = kernel.get_backend("python")
    cy = kernel.get_backend("cython")
    tracked = np.asarray([0, 2], dtype=np.int64)
    checkpoints = np.asarray([5, 50, 500], dtype=np.int64)
    args = (8, 2, 0, tracked, checkpoints, 0.0)
    a = py.run_checkpoints(np.random.PCG64(seed_sequence(12)), *args)
    b = cy.run_checkpoints(np.random.PCG64(seed_sequence(12)), *args)
    for x, y in zip(a, b):
        assert np.array_equal(x, y)


def test_get_backend_unknown_raises():
    with pytest.raises(ValueError):
        kernel.get_backend("fortran")


def test_backend_env_override():
    code = (
        "import moranweights.kernel as k; "
        "print(k.BACKEND)"
    )
    out = subprocess.run(
        [sys.executable, "-c", code],
        env={**os.environ, "MORANWEIGHTS_BACKEND": "python"},
        capture_output=True,
        text=True,
    )
    assert out.stdout.strip() == "python"


def test_kernel_rejects_bad_population():
    py = kernel.get_backend("python")
    with pytest.raises(ValueError):
        py.sample_events(np.random.PCG64(0), 3, 3, 0, 10)  # distinct needs N >= m + 1
