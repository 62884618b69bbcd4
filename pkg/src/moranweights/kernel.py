"""Replicate-kernel backend selection.

The compiled kernel is used when importable; the pure-Python kernel is the
fallback. Both consume the same raw-word stream, so results are
bit-identical and the choice only affects speed. Set MORANWEIGHTS_BACKEND
to ``python`` or ``cython`` to force a backend at import time.
"""

from __future__ import annotations

import os

from . import _kernel_py

try:
    from . import _kernel
except ImportError:
    _kernel = None

_BACKENDS = {"python": _kernel_py}
if _kernel is not None:
    _BACKENDS["cython"] = _kernel

_forced = os.environ.get("MORANWEIGHTS_BACKEND", "").strip().lower()
if _forced:
    if _forced not in _BACKENDS:
        raise ImportError(
            f"MORANWEIGHTS_BACKEND={_forced!r} not available; "
            f"choose from {sorted(_BACKENDS)}"
        )
    BACKEND = _forced
else:
    BACKEND = "cython" if _kernel is not None else "python"


def available_backends() -> tuple[str, ...]:
    return tuple(sorted(_BACKENDS))


def get_backend(name: str | None = None):
    """Kernel module for ``name`` (None or ``auto`` selects the default)."""
    if name is None or name == "auto":
        name = BACKEND
    try:
        return _BACKENDS[name]
    except KeyError:
        raise ValueError(
            f"unknown backend {name!r}; available: {sorted(_BACKENDS)}"
        ) from None


def sample_events(bit_generator, population_size, parent_count, variant_code, n_events):
    return get_backend().sample_events(
        bit_generator, population_size, parent_count, variant_code, n_events
    )


def run_replicate(bit_generator, population_size, parent_count, variant_code,
                  tracked, epsilon, n_max, check_every, slack):
    return get_backend().run_replicate(
        bit_generator, population_size, parent_count, variant_code,
        tracked, epsilon, n_max, check_every, slack,
    )


def run_checkpoints(bit_generator, population_size, parent_count, variant_code,
                    tracked, checkpoints, slack):
    return get_backend().run_checkpoints(
        bit_generator, population_size, parent_count, variant_code,
        tracked, checkpoints, slack,
    )
