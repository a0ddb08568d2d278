"""
Named random streams derived from a single seed.

Every draw in the toolkit comes from a generator keyed by
(seed, stream, *indices), so results never depend on scheduling or on how
many workers ran.
"""

from __future__ import annotations

from enum import IntEnum

import numpy as np


class Stream(IntEnum):
    """Independent sub-streams of a run seed."""
    SIMULATE = 0
    OPTIMIZER = 1
    SUBSAMPLING = 2
    MIXING = 3


def stream_rng(seed: int, stream: Stream, *indices: int) -> np.random.Generator:
    """
    Generator for one named sub-stream.

    Example:
        >>> a = stream_rng(42, Stream.SIMULATE, 0, 5).standard_normal()
        >>> b = stream_rng(42, Stream.SIMULATE, 0, 5).standard_normal()
        >>> a == b
        True
    """
    sequence = np.random.SeedSequence(entropy=int(seed), spawn_key=(int(stream),) + tuple(int(i) for i in indices))
    return np.random.default_rng(sequence)


def path_normals(seed: int, coordinate: int, n_paths: int, size: int) -> np.ndarray:
    """
    Standard normal draws of shape (n_paths, size), one stream per (coordinate, path).
    """
    out = np.empty((n_paths, size))
    for path in range(n_paths):
        out[path] = stream_rng(seed, Stream.SIMULATE, coordinate, path).standard_normal(size)
    return out


def path_uniforms(seed: int, coordinate: int, n_paths: int, size: int) -> np.ndarray:
    """Uniform (0, 1) draws of shape (n_paths, size), one stream per (coordinate, path)."""
    out = np.empty((n_paths, size))
    for path in range(n_paths):
        out[path] = stream_rng(seed, Stream.SIMULATE, coordinate, path).random(size)
    # random() may return exactly 0
    return np.clip(out, np.finfo(float).tiny, 1.0 - np.finfo(float).epsneg)
