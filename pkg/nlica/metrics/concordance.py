"""
==============================================================================
Concordance and Monomial Discordance Module
==============================================================================

Recovery scores comparing an estimate Y with the true sources X.

This module implements:
- concordance_matrix: entry (i, j) is the averaged |tau| between X^i and Y^j
    * ensemble mode pairs samples at a fixed time and averages over times
    * single_path mode pairs time points of one path and averages over paths
- match_permutation: permutation matrix closest to a concordance matrix
- monomial_discordance: normalized Frobenius distance to that permutation

A discordance of 0 means Y recovers X up to a permutation and monotone
coordinate maps; the all-ones matrix scores 1.

==============================================================================
"""

from __future__ import annotations

import itertools
import logging
import math
from typing import List, Optional, Sequence, Union

import numpy as np

from nlica.core.exceptions import dimension_mismatch, validation_error
from nlica.schemas.results import ConcordanceMatrix, ConcordanceMode, DiscordanceResult
from nlica.signatures.paths import PathEnsemble

from .kendall import kendall_tau_matrix


# Module logger
logger = logging.getLogger(__name__)

# Exhaustive permutation search bound (10! candidates)
MAX_MATCH_DIMENSION = 10

# Permutations scored per vectorized block
PERMUTATION_BLOCK = 40320


# =============================================================================
# CONCORDANCE MATRIX
# =============================================================================

def _check_compatible(x: PathEnsemble, y: PathEnsemble) -> None:
    if x.d != y.d:
        raise dimension_mismatch("Ensembles must have the same dimension", x=x.d, y=y.d)
    if x.n_times != y.n_times or not np.array_equal(x.times, y.times):
        raise dimension_mismatch("Ensembles must share the time grid", x=x.n_times, y=y.n_times)


def _varying(values: np.ndarray) -> np.ndarray:
    """Mask of time indices where every coordinate varies across samples."""
    spread = values.max(axis=0) - values.min(axis=0)
    return np.all(spread > 0, axis=1)


def _average(blocks: Sequence[np.ndarray]) -> np.ndarray:
    stacked = np.abs(np.stack(blocks))
    d_x, d_y = stacked.shape[1:]
    averaged = np.empty((d_x, d_y))
    for i in range(d_x):
        for j in range(d_y):
            averaged[i, j] = math.fsum(stacked[:, i, j]) / stacked.shape[0]
    return np.clip(averaged, 0.0, 1.0)


def concordance_matrix(
    x: PathEnsemble,
    y: PathEnsemble,
    mode: Optional[Union[ConcordanceMode, str]] = None,
) -> ConcordanceMatrix:
    """
    Averaged absolute Kendall correlations between X and Y coordinates.

    Args:
        x: True sources
        y: Estimate on the same grid
        mode: ConcordanceMode; defaults to ensemble when both ensembles hold
            at least 2 paths and to single_path otherwise

    Returns:
        ConcordanceMatrix with entries in [0, 1]

    Raises:
        AppException: DIMENSION_MISMATCH for incompatible ensembles,
            VALIDATION_ERROR when the mode cannot be applied

    Example:
        >>> concordance_matrix(sources, sources).entries[0][0]
        1.0
    """
    _check_compatible(x, y)
    if mode is None:
        mode = ConcordanceMode.ENSEMBLE if min(x.n_paths, y.n_paths) >= 2 else ConcordanceMode.SINGLE_PATH
    mode = ConcordanceMode(mode)

    if mode is ConcordanceMode.ENSEMBLE:
        if x.n_paths != y.n_paths:
            raise dimension_mismatch("Ensemble mode pairs samples one to one", x=x.n_paths, y=y.n_paths)
        if x.n_paths < 2:
            raise validation_error("ensemble mode needs at least 2 paths", "mode")
        # Times where a coordinate is identical on every path carry no ranks
        usable = np.flatnonzero(_varying(x.values) & _varying(y.values))
        if usable.size == 0:
            raise validation_error("no time point where all coordinates vary across paths", "mode")
        logger.debug(f"Ensemble concordance over {usable.size}/{x.n_times} time points")
        blocks = [kendall_tau_matrix(x.values[:, t, :], y.values[:, t, :]) for t in usable]
    else:
        if x.n_paths != y.n_paths:
            raise dimension_mismatch("Single-path mode pairs paths one to one", x=x.n_paths, y=y.n_paths)
        blocks = [kendall_tau_matrix(x.values[p], y.values[p]) for p in range(x.n_paths)]

    return ConcordanceMatrix(entries=_average(blocks).tolist(), mode=mode)


# =============================================================================
# PERMUTATION MATCHING
# =============================================================================

def _as_array(c: Union[ConcordanceMatrix, np.ndarray, Sequence[Sequence[float]]]) -> np.ndarray:
    entries = c.entries if isinstance(c, ConcordanceMatrix) else c
    matrix = np.asarray(entries, dtype=float)
    if matrix.ndim != 2 or matrix.shape[0] != matrix.shape[1]:
        raise validation_error("concordance matrix must be square", "entries")
    d = matrix.shape[0]
    if d < 2:
        raise validation_error("discordance needs d >= 2", "d")
    if d > MAX_MATCH_DIMENSION:
        raise validation_error(f"permutation search supports d <= {MAX_MATCH_DIMENSION}, got {d}", "d")
    if not np.all(np.isfinite(matrix)) or np.any(matrix < 0) or np.any(matrix > 1):
        raise validation_error("concordance entries must lie in [0, 1]", "entries")
    return matrix


def match_permutation(
    c: Union[ConcordanceMatrix, np.ndarray, Sequence[Sequence[float]]],
) -> List[int]:
    """
    Permutation π maximizing Σ_i C[i, π(i)].

    This is the permutation matrix nearest to C in Frobenius norm. Among
    equally good candidates the lexicographically smallest wins.

    Args:
        c: Square matrix with entries in [0, 1], 2 <= d <= 10

    Returns:
        π as a list; π[i] is the estimate coordinate matched to source i
    """
    matrix = _as_array(c)
    d = matrix.shape[0]
    rows = np.arange(d)

    best_score = -math.inf
    best: Optional[np.ndarray] = None
    candidates = itertools.permutations(range(d))
    while True:
        block = np.array(list(itertools.islice(candidates, PERMUTATION_BLOCK)), dtype=np.intp)
        if block.size == 0:
            break
        scores = matrix[rows, block].sum(axis=1)
        index = int(np.argmax(scores))
        if scores[index] > best_score:
            best_score = float(scores[index])
            best = block[index]
    return best.tolist()


def monomial_discordance(
    c: Union[ConcordanceMatrix, np.ndarray, Sequence[Sequence[float]]],
) -> DiscordanceResult:
    """
    Normalized Frobenius distance from C to the nearest permutation matrix.

    Args:
        c: Square matrix with entries in [0, 1], 2 <= d <= 10

    Returns:
        DiscordanceResult with value in [0, 1] and the matching permutation

    Raises:
        AppException: VALIDATION_ERROR for d outside 2..10 or entries
            outside [0, 1]

    Example:
        >>> monomial_discordance([[0.079, 0.930], [0.853, 0.065]]).value
        0.1359...
    """
    matrix = _as_array(c)
    d = matrix.shape[0]
    permutation = match_permutation(matrix)

    target = np.zeros_like(matrix)
    target[np.arange(d), permutation] = 1.0
    squared = math.fsum(((matrix - target) ** 2).ravel())
    value = min(1.0, math.sqrt(squared / (d * (d - 1))))
    return DiscordanceResult(value=value, permutation=permutation)
