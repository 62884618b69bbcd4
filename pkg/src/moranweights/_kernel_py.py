"""Pure-Python replicate kernel.

The compiled kernel in ``_kernel.pyx`` mirrors this module operation for
operation: same raw-word consumption order, same update arithmetic, same
scan cadence. Any change here must be replayed there.
"""

from __future__ import annotations

import numpy as np

from .randomness import RawStream


def _check_model(n: int, m: int, variant_code: int) -> None:
    if variant_code not in (0, 1):
        raise ValueError(f"variant_code must be 0 or 1, got {variant_code}")
    if not 2 <= m <= 63:
        raise ValueError(f"parent_count must be in [2, 63], got {m}")
    least = m + 1 if variant_code == 0 else 1
    if n < least:
        raise ValueError(f"population_size must be >= {least}, got {n}")


def _draw_slots(stream: RawStream, n: int, m: int, variant_code: int, slots: list[int]) -> None:
    # parents first (slots 0..m-1), child last (slot m)
    for s in range(m + 1):
        value = stream.below(n)
        if variant_code == 0:
            while value in slots[:s]:
                value = stream.below(n)
        slots[s] = value


def sample_events(bit_generator, population_size, parent_count, variant_code, n_events):
    """Sampled events as an int64 array with columns [child, parent1..parentm]."""
    n, m = population_size, parent_count
    _check_model(n, m, variant_code)
    stream = RawStream(bit_generator)
    out = np.empty((n_events, m + 1), dtype=np.int64)
    slots = [0] * (m + 1)
    for e in range(n_events):
        _draw_slots(stream, n, m, variant_code, slots)
        out[e, 0] = slots[m]
        for s in range(m):
            out[e, 1 + s] = slots[s]
    return out


def _scan_rows(w, lower, upper, slack, step):
    n_rows, n = w.shape
    max_spread = 0.0
    for j in range(n_rows):
        row = w[j]
        lo = row[0]
        hi = row[0]
        for i in range(1, n):
            v = row[i]
            if v < lo:
                lo = v
            if v > hi:
                hi = v
        if lo < lower[j] - slack or hi > upper[j] + slack:
            raise RuntimeError(
                f"spread bounds moved outward at step {step} (row {j}): "
                f"[{lower[j]}, {upper[j]}] -> [{lo}, {hi}]"
            )
        lower[j] = lo
        upper[j] = hi
        if hi - lo > max_spread:
            max_spread = hi - lo
    return max_spread


def run_replicate(
    bit_generator,
    population_size,
    parent_count,
    variant_code,
    tracked,
    epsilon,
    n_max,
    check_every,
    slack,
):
    """Stream events until every tracked spread is <= epsilon or n_max events.

    Returns ``(lower, upper, steps)`` with the bounds from the final scan.
    """
    n, m = population_size, parent_count
    _check_model(n, m, variant_code)
    stream = RawStream(bit_generator)
    tracked = np.asarray(tracked, dtype=np.int64)
    n_rows = tracked.shape[0]
    w = np.zeros((n_rows, n), dtype=np.float64)
    for j in range(n_rows):
        w[j, tracked[j]] = 1.0
    lower = w.min(axis=1)
    upper = w.max(axis=1)
    if float((upper - lower).max()) <= epsilon:
        return lower, upper, 0
    slots = [0] * (m + 1)
    step = 0
    next_check = check_every
    while step < n_max:
        _draw_slots(stream, n, m, variant_code, slots)
        child = slots[m]
        for j in range(n_rows):
            row = w[j]
            acc = 0.0
            for s in range(m):
                acc += row[slots[s]]
            row[child] = acc / m
        step += 1
        if step == next_check or step == n_max:
            max_spread = _scan_rows(w, lower, upper, slack, step)
            if max_spread <= epsilon:
                break
            if step == next_check:
                next_check += check_every
    return lower, upper, step


def run_checkpoints(
    bit_generator,
    population_size,
    parent_count,
    variant_code,
    tracked,
    checkpoints,
    slack,
):
    """Marginals and spread bounds recorded after the given event counts.

    Returns ``(marginal, lower, upper)``, each of shape
    ``(len(checkpoints), len(tracked))``. Checkpoints must be ascending.
    """
    n, m = population_size, parent_count
    _check_model(n, m, variant_code)
    stream = RawStream(bit_generator)
    tracked = np.asarray(tracked, dtype=np.int64)
    checkpoints = np.asarray(checkpoints, dtype=np.int64)
    n_rows = tracked.shape[0]
    n_cp = checkpoints.shape[0]
    w = np.zeros((n_rows, n), dtype=np.float64)
    for j in range(n_rows):
        w[j, tracked[j]] = 1.0
    lower = w.min(axis=1)
    upper = w.max(axis=1)
    marginal_out = np.empty((n_cp, n_rows), dtype=np.float64)
    lower_out = np.empty((n_cp, n_rows), dtype=np.float64)
    upper_out = np.empty((n_cp, n_rows), dtype=np.float64)
    slots = [0] * (m + 1)
    step = 0
    for c in range(n_cp):
        target = int(checkpoints[c])
        if target < step:
            raise ValueError(f"checkpoints must be ascending, got {target} after {step}")
        while step < target:
            _draw_slots(stream, n, m, variant_code, slots)
            child = slots[m]
            for j in range(n_rows):
                row = w[j]
                acc = 0.0
                for s in range(m):
                    acc += row[slots[s]]
                row[child] = acc / m
            step += 1
        _scan_rows(w, lower, upper, slack, step)
        for j in range(n_rows):
            row = w[j]
            acc = 0.0
            for i in range(n):
                acc += row[i]
            marginal_out[c, j] = acc
            lower_out[c, j] = lower[j]
            upper_out[c, j] = upper[j]
    return marginal_out, lower_out, upper_out
