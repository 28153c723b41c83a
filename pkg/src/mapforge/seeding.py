"""Deterministic seeding and random draws.

Everything stochastic in the toolkit goes through the SplitMix64 stream
below, so a (master_seed, tile_id) pair pins the output bit-exactly on
every platform. The algorithm, spelled out so it can be reimplemented:

    state   <- seed
    next(): state <- (state + 0x9E3779B97F4A7C15) mod 2^64
            z <- state
            z <- ((z XOR (z >> 30)) * 0xBF58476D1CE4E5B9) mod 2^64
            z <- ((z XOR (z >> 27)) * 0x94D049BB133111EB) mod 2^64
            return z XOR (z >> 31)

Floats in [0,1) take the top 53 bits of next() divided by 2^53. Bounded
integers use next() modulo n; the modulo bias is below 2^-32 for every n
the toolkit draws and is accepted for simplicity.
"""

from __future__ import annotations

_U64 = (1 << 64) - 1
GAMMA = 0x9E3779B97F4A7C15
_GAMMA = GAMMA
_MIX1 = 0xBF58476D1CE4E5B9
_MIX2 = 0x94D049BB133111EB


def _finalize(z: int) -> int:
    z = ((z ^ (z >> 30)) * _MIX1) & _U64
    z = ((z ^ (z >> 27)) * _MIX2) & _U64
    return z ^ (z >> 31)


def derive_tile_seed(master_seed: int, tile_id: int) -> int:
    """Derive the per-tile seed from the run's master seed.

    Computed as the SplitMix64 finalizer applied to
    (master_seed + (tile_id + 1) * 0x9E3779B97F4A7C15) mod 2^64.
    Injective in tile_id for a fixed master seed because the gamma
    constant is odd, so distinct tiles never share a seed.
    """
    z = (master_seed + (tile_id + 1) * _GAMMA) & _U64
    return _finalize(z)


class Rng:
    """SplitMix64 draw stream, documented in the module docstring."""

    def __init__(self, seed: int):
        self._state = seed & _U64

    def next_u64(self) -> int:
        self._state = (self._state + _GAMMA) & _U64
        return _finalize(self._state)

    def random(self) -> float:
        """Uniform float in [0, 1) with 53 bits of precision."""
        return (self.next_u64() >> 11) / float(1 << 53)

    def uniform(self, lo: float, hi: float) -> float:
        return lo + (hi - lo) * self.random()

    def randint(self, n: int) -> int:
        """Uniform integer in [0, n)."""
        if n <= 0:
            raise ValueError("randint bound must be positive")
        return self.next_u64() % n
