"""Shared randomness discipline for the python and compiled kernels.

Every stochastic routine in this package draws raw 64-bit words from a PCG64
bit generator and reduces them to bounded integers by masked rejection. The
compiled kernel consumes the same words in the same order through numpy's
C-level bit-generator interface, so both kernels produce bit-identical
results from the same seed.
"""

from __future__ import annotations

import numpy as np

RNG_ALGORITHM = "PCG64"

_BUFFER_SIZE = 512


def seed_sequence(master_seed: int, replicate: int | None = None) -> np.random.SeedSequence:
    """Seed sequence for a replicate, independent across replicate indices."""
    if replicate is None:
        return np.random.SeedSequence(master_seed)
    return np.random.SeedSequence(master_seed, spawn_key=(replicate,))


def bit_generator(master_seed: int, replicate: int | None = None) -> np.random.PCG64:
    return np.random.PCG64(seed_sequence(master_seed, replicate))


class RawStream:
    """Buffered raw-uint64 stream with bounded draws by masked rejection.

    ``below(n)`` masks the low ``ceil(log2 n)`` bits of the next word and
    rejects values >= n, so the draw is exactly uniform on [0, n) and the
    number of words consumed depends only on the drawn values, never on
    floating point. ``below(1)`` consumes nothing.
    """

    def __init__(self, source: np.random.BitGenerator | int):
        if isinstance(source, (int, np.integer)):
            source = bit_generator(int(source))
        self._bitgen = source
        self._buffer = np.empty(0, dtype=np.uint64)
        self._pos = 0

    @property
    def bit_generator(self) -> np.random.BitGenerator:
        return self._bitgen

    def next_raw(self) -> int:
        if self._pos >= self._buffer.size:
            self._buffer = np.atleast_1d(self._bitgen.random_raw(_BUFFER_SIZE))
            self._pos = 0
        value = int(self._buffer[self._pos])
        self._pos += 1
        return value

    def below(self, n: int) -> int:
        if n <= 0:
            raise ValueError(f"bound must be positive, got {n}")
        if n == 1:
            return 0
        mask = (1 << (n - 1).bit_length()) - 1
        while True:
            value = self.next_raw() & mask
            if value < n:
                return value
