"""Counter-based deterministic random numbers.

A splitmix64-style finalizer hashed over (key, counter) pairs.  Samplers
key every draw by (seed, sample index, round index), so draws are
reproducible and order-independent: sample i can be regenerated without
replaying samples 0..i-1.

Three implementations must agree bit for bit: the plain-int versions
here (reference), the jitted scalar versions in ``_loops`` and the
uint64-array versions in ``_vectorized``.
"""

import numpy as np

MASK64 = 0xFFFFFFFFFFFFFFFF
GOLDEN = 0x9E3779B97F4A7C15
MIX1 = 0xBF58476D1CE4E5B9
MIX2 = 0x94D049BB133111EB
_INV53 = 1.0 / 9007199254740992.0  # 2 ** -53


def mix64(z):
    z = (z + GOLDEN) & MASK64
    z = ((z ^ (z >> 30)) * MIX1) & MASK64
    z = ((z ^ (z >> 27)) * MIX2) & MASK64
    return z ^ (z >> 31)


def hash2(a, b):
    return mix64(mix64(a & MASK64) ^ (b & MASK64))


def uniform01(key, counter):
    """Deterministic uniform in [0, 1) for a (key, counter) pair."""
    return float(hash2(key, counter) >> 11) * _INV53


def derive_sample_seed(seed, index):
    """Per-sample key for sample ``index`` of a run seeded with ``seed``."""
    return hash2(seed, index)


def uniform01_array(keys, counter):
    """Vectorized uniform01 over a uint64 key array (same bits as scalar)."""
    keys = np.asarray(keys, dtype=np.uint64)
    z = keys + np.uint64(GOLDEN)
    z = (z ^ (z >> np.uint64(30))) * np.uint64(MIX1)
    z = (z ^ (z >> np.uint64(27))) * np.uint64(MIX2)
    z = z ^ (z >> np.uint64(31))
    z = (z ^ np.uint64(counter)) + np.uint64(GOLDEN)
    z = (z ^ (z >> np.uint64(30))) * np.uint64(MIX1)
    z = (z ^ (z >> np.uint64(27))) * np.uint64(MIX2)
    z = z ^ (z >> np.uint64(31))
    return (z >> np.uint64(11)).astype(np.float64) * _INV53
