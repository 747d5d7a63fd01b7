"""SplitMix64: the named, seedable generator behind every randomized instance.

SplitMix64 is a 64-bit counter-based generator (Steele, Lea & Flood 2014):
state advances by the fixed odd constant 0x9E3779B97F4A7C15 and each output
is a finalizing mix of the new state. It is trivially reproducible across
languages, which is why the platform default generator is never used here.
"""

from __future__ import annotations

from typing import List

_MASK = (1 << 64) - 1
_GAMMA = 0x9E3779B97F4A7C15


class SplitMix64(object):
    """Deterministic 64-bit generator; `seed` is a 64-bit unsigned integer."""

    def __init__(self, seed: int) -> None:
        if not 0 <= seed <= _MASK:
            raise ValueError("seed must be a 64-bit unsigned integer")
        self._state = seed

    def next_u64(self) -> int:
        self._state = (self._state + _GAMMA) & _MASK
        z = self._state
        z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & _MASK
        z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & _MASK
        return z ^ (z >> 31)

    def uniform(self) -> float:
        """A double in [0, 1) with 53 random bits."""
        return (self.next_u64() >> 11) * 2.0**-53

    def below(self, n: int) -> int:
        """An integer in [0, n) by modulo reduction (documented, bias < n/2^64)."""
        if n <= 0:
            raise ValueError("n must be positive")
        return self.next_u64() % n

    def sample(self, population: int, k: int, lo: int = 0) -> List[int]:
        """k distinct integers from [lo, lo+population), sorted ascending."""
        if k > population:
            raise ValueError(f"cannot sample {k} from {population}")
        chosen: set = set()
        while len(chosen) < k:
            chosen.add(lo + self.below(population))
        return sorted(chosen)
