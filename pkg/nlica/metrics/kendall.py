"""
==============================================================================
Kendall Rank Correlation Module
==============================================================================

Kendall's tau-a: (concordant − discordant) / C(n, 2), ties counted as
neither.

This module implements:
- kendall_tau: one pair of samples, O(n log n) through a merge sort that
  counts the swaps a bubble sort would need
- kendall_tau_matrix: every column of one sample against every column of
  another, from exact sign agreements computed in row blocks

Both return the same value up to floating-point rounding of a single
division.

==============================================================================
"""

from __future__ import annotations

import logging
from typing import Sequence, Tuple

import numpy as np

from nlica.core.exceptions import dimension_mismatch, validation_error


# Module logger
logger = logging.getLogger(__name__)

# Pairwise sign entries held in memory per block
BLOCK_ENTRIES = 1 << 20


def _tied_pairs(sorted_values: np.ndarray) -> int:
    """Number of tied pairs in an already sorted array."""
    if sorted_values.size < 2:
        return 0
    boundaries = np.flatnonzero(np.diff(sorted_values) != 0) + 1
    runs = np.diff(np.concatenate(([0], boundaries, [sorted_values.size])))
    return int(np.sum(runs * (runs - 1) // 2))


def _joint_tied_pairs(x: np.ndarray, y: np.ndarray) -> int:
    """Number of pairs tied in both x and y, for x, y sorted by (x, y)."""
    if x.size < 2:
        return 0
    changes = (np.diff(x) != 0) | (np.diff(y) != 0)
    boundaries = np.flatnonzero(changes) + 1
    runs = np.diff(np.concatenate(([0], boundaries, [x.size])))
    return int(np.sum(runs * (runs - 1) // 2))


def _merge_count(values: np.ndarray) -> Tuple[np.ndarray, int]:
    """Bottom-up merge sort returning the sorted array and the swap count."""
    current = values.copy()
    n = current.size
    swaps = 0
    width = 1
    while width < n:
        merged = np.empty_like(current)
        for start in range(0, n, 2 * width):
            middle = min(start + width, n)
            end = min(start + 2 * width, n)
            left = current[start:middle]
            right = current[middle:end]
            if right.size == 0 or left[-1] <= right[0]:
                merged[start:end] = current[start:end]
                continue
            # Elements of left strictly greater than each right element
            positions = np.searchsorted(left, right, side="right")
            swaps += int(np.sum(left.size - positions))
            merged[start:end] = np.sort(np.concatenate((left, right)), kind="mergesort")
        current = merged
        width *= 2
    return current, swaps


def kendall_tau(a: Sequence[float], b: Sequence[float]) -> float:
    """
    Kendall's tau-a of paired samples.

    Args:
        a: First sample
        b: Second sample, same length

    Returns:
        Value in [−1, 1]

    Raises:
        AppException: DIMENSION_MISMATCH for unequal lengths,
            VALIDATION_ERROR for fewer than 2 pairs

    Example:
        >>> kendall_tau([1, 2, 3], [3, 1, 2])
        -0.3333333333333333
    """
    x = np.asarray(a, dtype=float).ravel()
    y = np.asarray(b, dtype=float).ravel()
    if x.size != y.size:
        raise dimension_mismatch("Kendall's tau needs paired samples", a=int(x.size), b=int(y.size))
    n = x.size
    if n < 2:
        raise validation_error("Kendall's tau needs at least 2 pairs", "n")

    order = np.lexsort((y, x))
    x, y = x[order], y[order]
    pairs = n * (n - 1) // 2
    x_ties = _tied_pairs(x)
    joint_ties = _joint_tied_pairs(x, y)

    sorted_y, swaps = _merge_count(y)
    y_ties = _tied_pairs(sorted_y)

    balance = pairs - x_ties - y_ties + joint_ties - 2 * swaps
    return balance / pairs


def kendall_tau_matrix(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """
    Kendall's tau-a between every column of a and every column of b.

    Args:
        a: Shape (n, p)
        b: Shape (n, q)

    Returns:
        Array of shape (p, q); entry (i, j) is tau(a[:, i], b[:, j])

    Raises:
        AppException: DIMENSION_MISMATCH for unequal row counts,
            VALIDATION_ERROR for fewer than 2 rows
    """
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    if a.ndim == 1:
        a = a[:, None]
    if b.ndim == 1:
        b = b[:, None]
    if a.shape[0] != b.shape[0]:
        raise dimension_mismatch("Kendall's tau needs paired samples", a=a.shape[0], b=b.shape[0])
    n = a.shape[0]
    if n < 2:
        raise validation_error("Kendall's tau needs at least 2 pairs", "n")

    width = max(a.shape[1], b.shape[1])
    block = max(1, BLOCK_ENTRIES // (n * width))
    balance = np.zeros((a.shape[1], b.shape[1]), dtype=np.int64)
    for start in range(0, n, block):
        rows = slice(start, min(start + block, n))
        signs_a = np.sign(a[rows, None, :] - a[None, :, :]).astype(np.int64)
        signs_b = np.sign(b[rows, None, :] - b[None, :, :]).astype(np.int64)
        balance += np.einsum("rnp,rnq->pq", signs_a, signs_b)

    # Every unordered pair was counted twice
    return balance / (n * (n - 1))
