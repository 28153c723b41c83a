"""Seed derivation and the deterministic RNG."""

import numpy as np

from mapforge.seeding import GAMMA, Rng, derive_tile_seed

U64 = (1 << 64) - 1


def reference_mix(z: int) -> int:
    """Independent transcription of the documented finalizer."""
    z &= U64
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & U64
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & U64
    return z ^ (z >> 31)


def test_tile_seed_golden_constant():
    # First output of the generator for master seed 0: frozen forever.
    assert derive_tile_seed(0, 0) == 0xE220A8397B1DCDAF


def test_tile_seed_matches_documented_mix():
    for master in (0, 1, 42, 0xDEADBEEF, U64):
        for tile in (0, 1, 2, 999, 10**9):
            expected = reference_mix((master + (tile + 1) * GAMMA) & U64)
            assert derive_tile_seed(master, tile) == expected


def test_tile_seed_injective_over_million_tiles():
    master = 1234567
    # Vectorized mirror of the scalar mix, then a full collision scan.
    tiles = np.arange(1_000_000, dtype=np.uint64)
    with np.errstate(over="ignore"):
        z = np.uint64(master) + (tiles + np.uint64(1)) * np.uint64(GAMMA)
        z = (z ^ (z >> np.uint64(30))) * np.uint64(0xBF58476D1CE4E5B9)
        z = (z ^ (z >> np.uint64(27))) * np.uint64(0x94D049BB133111EB)
        z = z ^ (z >> np.uint64(31))
    assert len(np.unique(z)) == 1_000_000
    for t in (0, 1, 31337, 999_999):
        assert derive_tile_seed(master, t) == int(z[t])


def test_rng_stream_matches_reference():
    rng = Rng(42)
    state = 42
    for _ in range(100):
        state = (state + GAMMA) & U64
        assert rng.next_u64() == reference_mix(state)


def test_rng_float_range_and_determinism():
    rng = Rng(7)
    values = [rng.random() for _ in range(1000)]
    assert all(0.0 <= v < 1.0 for v in values)
    rng2 = Rng(7)
    assert [rng2.random() for _ in range(1000)] == values


def test_rng_randint_bounds():
    rng = Rng(3)
    draws = [rng.randint(10) for _ in range(2000)]
    assert set(draws) <= set(range(10))
    assert len(set(draws)) == 10  # every bucket hit over 2000 draws


def test_uniform_covers_interval():
    rng = Rng(11)
    vals = [rng.uniform(2.0, 5.0) for _ in range(500)]
    assert all(2.0 <= v < 5.0 for v in vals)
    assert max(vals) > 4.5 and min(vals) < 2.5


def test_distinct_tiles_distinct_first_outputs():
    # Degradation pipeline relies on per-tile streams not colliding.
    master = 42
    firsts = {Rng(derive_tile_seed(master, t)).next_u64() for t in range(10_000)}
    assert len(firsts) == 10_000
