"""
Deterministic random substreams.

Every consumer gets its own numpy Generator derived from a 64-bit master
seed plus a tuple of integer keys, so results do not depend on the order
in which cells or gaps are processed.
"""
import zlib

import numpy as np


DEFAULT_SEED = 42


def _key_to_int(key):
    if isinstance(key, (int, np.integer)):
        if key < 0:
            raise ValueError(f"rng: negative substream key {key}")
        return int(key)

    if isinstance(key, float):
        return zlib.crc32(repr(key).encode("utf-8"))

    return zlib.crc32(str(key).encode("utf-8"))


def make_rng(seed: int = DEFAULT_SEED):
    return np.random.default_rng(np.random.SeedSequence(int(seed)))


def substream(seed: int, *keys):
    """Generator keyed by (seed, *keys); strings and floats are hashed stably."""
    spawn_key = tuple(_key_to_int(k) for k in keys)
    ss = np.random.SeedSequence(int(seed), spawn_key=spawn_key)
    return np.random.default_rng(ss)


def open_uniform(rng):
    """Uniform variate on the open interval (0, 1)."""
    u = rng.random()
    while u == 0.0:
        u = rng.random()
    return u
