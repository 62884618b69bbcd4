# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled replicate kernel.

Mirrors ``_kernel_py`` operation for operation: same raw-word consumption
order, same update arithmetic, same scan cadence, so results are
bit-identical across backends for the same bit generator state.
"""

from cpython.pycapsule cimport PyCapsule_GetPointer, PyCapsule_IsValid
from libc.stdint cimport int64_t, uint64_t

import numpy as np

from numpy.random cimport bitgen_t

cdef enum:
    MAX_SLOTS = 64


cdef int _check_model(int64_t n, int m, int variant_code) except -1:
    if variant_code != 0 and variant_code != 1:
        raise ValueError(f"variant_code must be 0 or 1, got {variant_code}")
    if m < 2 or m + 1 > MAX_SLOTS:
        raise ValueError(f"parent_count must be in [2, {MAX_SLOTS - 1}], got {m}")
    cdef int64_t least = m + 1 if variant_code == 0 else 1
    if n < least:
        raise ValueError(f"population_size must be >= {least}, got {n}")
    return 0


cdef bitgen_t *_capsule_bitgen(object bit_generator) except NULL:
    capsule = bit_generator.capsule
    if not PyCapsule_IsValid(capsule, "BitGenerator"):
        raise ValueError("expected a numpy BitGenerator")
    return <bitgen_t *>PyCapsule_GetPointer(capsule, "BitGenerator")


cdef inline uint64_t _mask_for(int64_t n) noexcept:
    cdef uint64_t mask = 1
    while mask < <uint64_t>(n - 1):
        mask = (mask << 1) | 1
    return mask


cdef inline int64_t _below(bitgen_t *bg, int64_t n, uint64_t mask) noexcept:
    cdef uint64_t value
    if n == 1:
        return 0
    while True:
        value = bg.next_uint64(bg.state) & mask
        if <int64_t>value < n:
            return <int64_t>value


cdef inline void _draw_slots(bitgen_t *bg, int64_t n, uint64_t mask, int m,
                             int variant_code, int64_t *slots) noexcept:
    # parents first (slots 0..m-1), child last (slot m)
    cdef int s, t
    cdef int64_t value
    cdef bint clash
    for s in range(m + 1):
        value = _below(bg, n, mask)
        if variant_code == 0:
            while True:
                clash = False
                for t in range(s):
                    if slots[t] == value:
                        clash = True
                        break
                if not clash:
                    break
                value = _below(bg, n, mask)
        slots[s] = value


cdef double _scan_rows(double[:, ::1] w, double[::1] lower, double[::1] upper,
                       double slack, int64_t step) except -1.0:
    cdef Py_ssize_t n_rows = w.shape[0]
    cdef Py_ssize_t n = w.shape[1]
    cdef Py_ssize_t j, i
    cdef double lo, hi, v, max_spread = 0.0
    for j in range(n_rows):
        lo = w[j, 0]
        hi = w[j, 0]
        for i in range(1, n):
            v = w[j, i]
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


def sample_events(object bit_generator, int population_size, int parent_count,
                  int variant_code, Py_ssize_t n_events):
    """Sampled events as an int64 array with columns [child, parent1..parentm]."""
    cdef bitgen_t *bg = _capsule_bitgen(bit_generator)
    cdef int64_t n = population_size
    cdef int m = parent_count
    _check_model(n, m, variant_code)
    out_arr = np.empty((n_events, m + 1), dtype=np.int64)
    cdef int64_t[:, ::1] out = out_arr
    cdef int64_t slots[MAX_SLOTS]
    cdef uint64_t mask = _mask_for(n)
    cdef Py_ssize_t e
    cdef int s
    for e in range(n_events):
        _draw_slots(bg, n, mask, m, variant_code, slots)
        out[e, 0] = slots[m]
        for s in range(m):
            out[e, 1 + s] = slots[s]
    return out_arr


def run_replicate(object bit_generator, int population_size, int parent_count,
                  int variant_code, object tracked, double epsilon,
                  int64_t n_max, int64_t check_every, double slack):
    """Stream events until every tracked spread is <= epsilon or n_max events.

    Returns ``(lower, upper, steps)`` with the bounds from the final scan.
    """
    cdef bitgen_t *bg = _capsule_bitgen(bit_generator)
    cdef int64_t n = population_size
    cdef int m = parent_count
    _check_model(n, m, variant_code)
    tracked_arr = np.ascontiguousarray(tracked, dtype=np.int64)
    cdef int64_t[::1] trk = tracked_arr
    cdef Py_ssize_t n_rows = trk.shape[0]
    w_arr = np.zeros((n_rows, n), dtype=np.float64)
    lower_arr = np.empty(n_rows, dtype=np.float64)
    upper_arr = np.empty(n_rows, dtype=np.float64)
    cdef double[:, ::1] w = w_arr
    cdef double[::1] lower = lower_arr
    cdef double[::1] upper = upper_arr
    cdef Py_ssize_t j
    cdef int s
    cdef int64_t child, step = 0, next_check = check_every
    cdef int64_t slots[MAX_SLOTS]
    cdef uint64_t mask = _mask_for(n)
    cdef double acc, max_spread
    for j in range(n_rows):
        w[j, trk[j]] = 1.0
        lower[j] = 1.0 if n == 1 else 0.0
        upper[j] = 1.0
    max_spread = 0.0
    for j in range(n_rows):
        if upper[j] - lower[j] > max_spread:
            max_spread = upper[j] - lower[j]
    if max_spread <= epsilon:
        return lower_arr, upper_arr, 0
    while step < n_max:
        _draw_slots(bg, n, mask, m, variant_code, slots)
        child = slots[m]
        for j in range(n_rows):
            acc = 0.0
            for s in range(m):
                acc += w[j, slots[s]]
            w[j, child] = acc / m
        step += 1
        if step == next_check or step == n_max:
            max_spread = _scan_rows(w, lower, upper, slack, step)
            if max_spread <= epsilon:
                break
            if step == next_check:
                next_check += check_every
    return lower_arr, upper_arr, int(step)


def run_checkpoints(object bit_generator, int population_size, int parent_count,
                    int variant_code, object tracked, object checkpoints,
                    double slack):
    """Marginals and spread bounds recorded after the given event counts.

    Returns ``(marginal, lower, upper)``, each of shape
    ``(len(checkpoints), len(tracked))``. Checkpoints must be ascending.
    """
    cdef bitgen_t *bg = _capsule_bitgen(bit_generator)
    cdef int64_t n = population_size
    cdef int m = parent_count
    _check_model(n, m, variant_code)
    tracked_arr = np.ascontiguousarray(tracked, dtype=np.int64)
    cp_arr = np.ascontiguousarray(checkpoints, dtype=np.int64)
    cdef int64_t[::1] trk = tracked_arr
    cdef int64_t[::1] cps = cp_arr
    cdef Py_ssize_t n_rows = trk.shape[0]
    cdef Py_ssize_t n_cp = cps.shape[0]
    w_arr = np.zeros((n_rows, n), dtype=np.float64)
    lower_arr = np.empty(n_rows, dtype=np.float64)
    upper_arr = np.empty(n_rows, dtype=np.float64)
    marginal_out = np.empty((n_cp, n_rows), dtype=np.float64)
    lower_out = np.empty((n_cp, n_rows), dtype=np.float64)
    upper_out = np.empty((n_cp, n_rows), dtype=np.float64)
    cdef double[:, ::1] w = w_arr
    cdef double[::1] lower = lower_arr
    cdef double[::1] upper = upper_arr
    cdef double[:, ::1] marg_v = marginal_out
    cdef double[:, ::1] lo_v = lower_out
    cdef double[:, ::1] hi_v = upper_out
    cdef Py_ssize_t j, c, i
    cdef int s
    cdef int64_t child, step = 0, target
    cdef int64_t slots[MAX_SLOTS]
    cdef uint64_t mask = _mask_for(n)
    cdef double acc
    for j in range(n_rows):
        w[j, trk[j]] = 1.0
        lower[j] = 1.0 if n == 1 else 0.0
        upper[j] = 1.0
    for c in range(n_cp):
        target = cps[c]
        if target < step:
            raise ValueError(f"checkpoints must be ascending, got {target} after {step}")
        while step < target:
            _draw_slots(bg, n, mask, m, variant_code, slots)
            child = slots[m]
            for j in range(n_rows):
                acc = 0.0
                for s in range(m):
                    acc += w[j, slots[s]]
                w[j, child] = acc / m
            step += 1
        _scan_rows(w, lower, upper, slack, step)
        for j in range(n_rows):
            acc = 0.0
            for i in range(n):
                acc += w[j, i]
            marg_v[c, j] = acc
            lo_v[c, j] = lower[j]
            hi_v[c, j] = upper[j]
    return marginal_out, lower_out, upper_out
