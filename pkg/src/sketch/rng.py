"""
Seeded randomness.

Every random draw in the package comes from a NumPy ``Philox`` generator (a
counter-based 64-bit PRNG) keyed by ``SeedSequence([seed, *streams])``. Draws for
different (round, worker) pairs are therefore independent of the order in which
they are made.
"""

import numpy as np

from src.errors import SketchError


def _seed_sequence(seed: int, streams: tuple[int, ...]) -> np.random.SeedSequence:
    entropy = [int(seed), *(int(s) for s in streams)]
    if any(value < 0 for value in entropy):
        raise SketchError(f"Seeds and stream ids must be non-negative, got {entropy}")
    return np.random.SeedSequence(entropy)


def make_rng(seed: int, *streams: int) -> np.random.Generator:
    """
    Builds the generator for a (seed, stream ids) pair.

    Args:
        seed: Non-negative user seed
        *streams: Non-negative stream identifiers (e.g. round and worker id)

    Returns:
        numpy Generator backed by Philox
    """
    return np.random.Generator(np.random.Philox(_seed_sequence(seed, streams)))


def derive_seed(seed: int, *streams: int) -> int:
    """Derives a 64-bit child seed from a (seed, stream ids) pair."""
    state = _seed_sequence(seed, streams).generate_state(1, dtype=np.uint64)
    return int(state[0])
