"""Seed derivation.

Every random object draws from its own Philox stream keyed by
``(seed, *keys)``, so results do not depend on the order in which
objects are generated.
"""
import numpy as np


def seed_sequence(seed, *keys):
    return np.random.SeedSequence(int(seed), spawn_key=tuple(int(k) for k in keys))


def make_rng(seed, *keys):
    """Return a counter-based generator for the stream ``(seed, *keys)``."""
    if isinstance(seed, np.random.Generator):
        if keys:
            raise TypeError("keys can only be used with an integer seed")
        return seed
    return np.random.Generator(np.random.Philox(seed_sequence(seed, *keys)))


# stream tags, kept distinct so parameter, allocation and pair draws never collide
STREAM_PARAMS = 0
STREAM_ALLOC = 1
STREAM_PAIRS = 2
STREAM_INIT = 3
STREAM_REPLICATE = 4
