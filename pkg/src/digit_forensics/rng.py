"""Seed-derived random substreams.

Every stochastic step draws from a generator keyed by (seed, stream tag,
context ints). Streams for independent pieces of work never overlap, so
results do not depend on the order in which that work runs.
"""
from __future__ import annotations

import numpy as np

STREAM_GENERATE = 1
STREAM_CALIBRATE = 2
STREAM_SCORE = 3
STREAM_NOISE = 4
STREAM_SPLIT = 5
STREAM_CORPUS = 6
STREAM_PAIRS = 7
STREAM_DATASET = 8


def substream(seed: int, *path: int) -> np.random.Generator:
    """Independent generator for the given seed and context path."""
    return np.random.default_rng(_entropy(seed, *path))


def fold_seed(seed: int, *path: int) -> int:
    """Collapse a context path into a plain non-negative integer seed."""
    return int(np.random.SeedSequence(_entropy(seed, *path)).generate_state(1)[0])


def _entropy(seed: int, *path: int) -> list[int]:
    parts = [int(seed), *(int(p) for p in path)]
    if any(p < 0 for p in parts):
        raise ValueError("seed and stream path must be non-negative integers")
    # Fold the path length in so encodings are prefix-free: numpy's
    # SeedSequence treats [s, a] and [s, a, 0] as the same entropy, which
    # would let two distinct context paths share a stream.
    return [parts[0], len(path), *parts[1:]]
