"""Seeded 64-bit PRNG used by every randomized operation in the package.

The generator is splitmix64: a counter stream passed through a fixed
64-bit finalizer. It is tiny, has no platform-dependent state, and the
same seed produces the same stream on every machine, which is what the
reproducibility contract of the generators and rounding routines needs.
Nothing in this package ever falls back to wall-clock seeding.
"""

from __future__ import annotations

_MASK = (1 << 64) - 1
_GAMMA = 0x9E3779B97F4A7C15


def mix64(z: int) -> int:
    """The splitmix64 finalizer: a bijective scramble of a 64-bit word."""
    z &= _MASK
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & _MASK
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & _MASK
    return z ^ (z >> 31)


class SplitMix64:
    """Deterministic stream of 64-bit words from an explicit seed.

    Child streams come from ``spawn()`` (or from feeding ``next_u64``
    outputs back in as seeds), which keeps per-trial substreams
    independent of how many draws the parent made before.
    """

    __slots__ = ("_state",)

    def __init__(self, seed: int):
        self._state = seed & _MASK

    def next_u64(self) -> int:
        self._state = (self._state + _GAMMA) & _MASK
        return mix64(self._state)

    def uniform(self) -> float:
        """Uniform float in [0, 1) with 53 random bits."""
        return (self.next_u64() >> 11) * 2.0**-53

    def randint(self, n: int) -> int:
        """Uniform integer in [0, n), unbiased via rejection."""
        if n <= 0:
            raise ValueError("randint needs n >= 1")
        bound = _MASK + 1 - ((_MASK + 1) % n)
        while True:
            v = self.next_u64()
            if v < bound:
                return v % n

    def spawn(self) -> "SplitMix64":
        return SplitMix64(self.next_u64())
