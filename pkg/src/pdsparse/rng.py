"""Seeded randomness for the experiment harness.

Every experiment draws from named counter-based streams: stream(seed,
"cs-table", trial, "matrix") and friends.  Distinct label tuples give
statistically independent streams off one 64-bit seed, so trials can run
in any order (or in parallel) and still reproduce byte-identical data.
Gaussians come from the Box-Muller transform on the raw uniform doubles,
keeping the draw sequence independent of library internals.
"""

import zlib

import numpy as np

from .errors import InvalidInputError


def stream(seed, *labels):
    """Counter-based generator for the (seed, labels...) stream.

    Labels are hashed individually, so ("cs", 1) and ("cs", 10) never
    collide the way string concatenation would.
    """
    key = tuple(zlib.crc32(str(label).encode("utf-8")) for label in labels)
    return np.random.Generator(np.random.Philox(np.random.SeedSequence(int(seed), spawn_key=key)))


def child_seed(seed, *labels):
    """Derived 63-bit seed for handing a labeled stream to a generator.

    Runners use this to give each (experiment, cardinality, trial) its own
    instance seed, so trial order and parallelism cannot change the data.
    """
    return int(stream(seed, *labels).integers(1 << 63))


def gaussians(gen, shape=None):
    """Standard normal draws via Box-Muller; scalar when shape is None."""
    if shape is None:
        count = 1
    else:
        count = int(np.prod(shape, dtype=np.int64))
    half = (count + 1) // 2
    # 1 - U keeps the radius log away from zero: U in [0, 1)
    radius = np.sqrt(-2.0 * np.log1p(-gen.random(half)))
    angle = (2.0 * np.pi) * gen.random(half)
    draws = np.concatenate([radius * np.cos(angle), radius * np.sin(angle)])[:count]
    if shape is None:
        return float(draws[0])
    return draws.reshape(shape)


def uniforms(gen, shape, low=0.0, high=1.0):
    """Uniform draws on [low, high)."""
    if high <= low:
        raise InvalidInputError(f"uniforms: need low < high, got [{low}, {high})")
    return low + (high - low) * gen.random(shape)


def sample_without_replacement(gen, n, k):
    """k distinct indices from range(n), uniformly, in sorted order.

    Partial Fisher-Yates: only the first k slots are ever settled, so the
    cost is O(n + k) and the draw count is exactly k.
    """
    if not 0 <= k <= n:
        raise InvalidInputError(f"sample_without_replacement: need 0 <= k <= {n}, got {k}")
    pool = np.arange(n)
    for i in range(k):
        j = i + int(gen.integers(n - i))
        pool[i], pool[j] = pool[j], pool[i]
    out = pool[:k]
    out.sort()
    return out
