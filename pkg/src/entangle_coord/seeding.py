"""Deterministic seed derivation for independent Monte Carlo streams.

Every batch driver in this package derives one child seed per trial from a
single master seed, so trials are reproducible individually and reorderable
without sharing generator state.  The mixing function is the SplitMix64
output stage applied to ``master + (index + 1) * GAMMA`` (all arithmetic
mod 2**64):

    z = (master + (index + 1) * 0x9E3779B97F4A7C15) mod 2**64
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) mod 2**64
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) mod 2**64
    child = z ^ (z >> 31)

The constants are the standard SplitMix64 ones; an independent
implementation following the four lines above reproduces the streams
exactly.  Reference vectors live in ``tests/data/seed_vectors.json``.
"""

from __future__ import annotations

_MASK64 = (1 << 64) - 1
GAMMA = 0x9E3779B97F4A7C15
_MIX1 = 0xBF58476D1CE4E5B9
_MIX2 = 0x94D049BB133111EB


def derive_seed(master: int, index: int) -> int:
    """Return the 64-bit child seed for trial `index` under `master`."""
    if master < 0 or index < 0:
        raise ValueError("master seed and trial index must be non-negative")
    z = (master + (index + 1) * GAMMA) & _MASK64
    z = ((z ^ (z >> 30)) * _MIX1) & _MASK64
    z = ((z ^ (z >> 27)) * _MIX2) & _MASK64
    return z ^ (z >> 31)


class SplitMix64:
    """Sequential SplitMix64 stream: state advances by GAMMA, output is mixed.

    This is the generator behind each protocol run.  It is fully specified by
    the same four lines as :func:`derive_seed` (with the state playing the
    role of the pre-mix sum), so runs can be reproduced outside this package
    from the seed alone.  Uniform doubles use the top 53 bits of each output.
    """

    __slots__ = ("_state",)

    def __init__(self, seed: int) -> None:
        if seed < 0:
            raise ValueError("seed must be non-negative")
        self._state = seed & _MASK64

    def next_uint64(self) -> int:
        self._state = s = (self._state + GAMMA) & _MASK64
        z = ((s ^ (s >> 30)) * _MIX1) & _MASK64
        z = ((z ^ (z >> 27)) * _MIX2) & _MASK64
        return z ^ (z >> 31)

    def random(self) -> float:
        """Uniform float in [0, 1) with 53-bit resolution."""
        return (self.next_uint64() >> 11) * 1.1102230246251565e-16  # 2**-53

    def getrandbits(self, k: int) -> int:
        """Uniform integer in [0, 2**k) for 1 <= k <= 64."""
        if not 1 <= k <= 64:
            raise ValueError("k must lie in 1..64")
        return self.next_uint64() >> (64 - k)

    def randrange(self, n: int) -> int:
        """Uniform integer in [0, n) by rejection on the top bits."""
        if n <= 0:
            raise ValueError("n must be positive")
        k = (n - 1).bit_length()
        if k == 0:
            return 0
        while True:
            v = self.next_uint64() >> (64 - k)
            if v < n:
                return v

    def shuffle(self, items: list) -> None:
        """In-place Fisher-Yates shuffle."""
        for i in range(len(items) - 1, 0, -1):
            j = self.randrange(i + 1)
            items[i], items[j] = items[j], items[i]
