"""
==============================================================================
Signature Engine Module
==============================================================================

Truncated signatures of piecewise-linear paths and their Monte-Carlo means.

This module implements:
- SignatureEngine: batched signatures over an ensemble, computed in fixed
  path chunks on a thread pool
- path_signature / log_signature: single-path signatures
- expected_signature / signature_cumulants: ensemble moments and cumulants

Algorithm:
---------
The signature of a linear segment with increment Δ is exp(Δ), whose level j
is Δ^{⊗j}/j!. Chen's relation folds the segments left to right:

    S_m <- S_m + sum_{k<m} S_k ⊗ Δ^{⊗(m-k)}/(m-k)!

updating levels from the top down so that every S_k on the right-hand side
is still the value before the segment.

Determinism:
-----------
Each path's signature is computed row-wise, so chunking does not change any
bit of it. Means are reduced per coefficient with math.fsum, which is exactly
rounded, so expected signatures do not depend on path order or thread count.

==============================================================================
"""

from __future__ import annotations

import logging
import math
from concurrent.futures import ThreadPoolExecutor
from typing import List, Optional

import numpy as np

from nlica.algebra import TensorSeries, log_series
from nlica.config import get_settings
from nlica.core.exceptions import validation_error

from .paths import PathEnsemble, SamplePath


# Module logger
logger = logging.getLogger(__name__)


def _segment_levels(increments: np.ndarray, depth: int) -> List[np.ndarray]:
    """Levels 1..depth of exp(Δ) for a batch of increments, shape (n, d^j)."""
    n = increments.shape[0]
    levels = [np.ones((n, 1)), increments]
    for j in range(2, depth + 1):
        levels.append((levels[-1][:, :, None] * increments[:, None, :]).reshape(n, -1) / j)
    return levels


def _chunk_signatures(increments: np.ndarray, depth: int) -> List[np.ndarray]:
    """
    Signatures of a chunk of paths.

    Args:
        increments: Shape (n, T-1, d)
        depth: Truncation depth

    Returns:
        List of depth+1 arrays, level m of shape (n, d^m)
    """
    n, n_segments, d = increments.shape
    levels = [np.ones((n, 1))] + [np.zeros((n, d ** m)) for m in range(1, depth + 1)]

    for segment in range(n_segments):
        exp_levels = _segment_levels(increments[:, segment, :], depth)
        for m in range(depth, 0, -1):
            update = exp_levels[m].copy()
            for k in range(1, m):
                update += (levels[k][:, :, None] * exp_levels[m - k][:, None, :]).reshape(n, -1)
            levels[m] += update

    return levels


class SignatureEngine:
    """
    Batched signature computation over path ensembles.

    Attributes:
        depth: Truncation depth M
        threads: Worker cap (1 runs in the calling thread)
        chunk_size: Paths per work item

    Example:
        >>> engine = SignatureEngine(depth=3)
        >>> sig = engine.expected_signature(ensemble)
        >>> sig.constant
        1.0
    """

    def __init__(
        self,
        depth: int,
        threads: Optional[int] = None,
        chunk_size: Optional[int] = None,
    ) -> None:
        """
        Initialize the engine.

        Args:
            depth: Truncation depth M (>= 1)
            threads: Worker cap (uses settings if None)
            chunk_size: Paths per chunk (uses settings if None)
        """
        if depth < 1:
            raise validation_error("depth must be at least 1", "depth")
        settings = get_settings()
        self._depth = depth
        self._threads = threads or settings.threads
        self._chunk_size = chunk_size or settings.chunk_size

    @property
    def depth(self) -> int:
        return self._depth

    # =========================================================================
    # BATCH SIGNATURES
    # =========================================================================

    def batch_signatures(self, ensemble: PathEnsemble) -> List[np.ndarray]:
        """
        Per-path signatures of an ensemble.

        Args:
            ensemble: Paths to sign

        Returns:
            List of depth+1 arrays; level m has shape (N, d^m)
        """
        increments = ensemble.increments
        n = increments.shape[0]
        bounds = [(start, min(start + self._chunk_size, n)) for start in range(0, n, self._chunk_size)]

        if n == 0:
            parts = []
        elif self._threads <= 1 or len(bounds) <= 1:
            parts = [_chunk_signatures(increments, self._depth)]
        else:
            with ThreadPoolExecutor(max_workers=self._threads) as pool:
                parts = list(pool.map(lambda ab: _chunk_signatures(increments[ab[0]:ab[1]], self._depth), bounds))

        if not parts:
            return [np.ones((0, 1))] + [np.zeros((0, ensemble.d ** m)) for m in range(1, self._depth + 1)]
        return [np.concatenate([part[m] for part in parts]) for m in range(self._depth + 1)]

    def path_signature(self, path: SamplePath) -> TensorSeries:
        """Signature of a single path."""
        levels = _chunk_signatures(path.increments[None, :, :], self._depth)
        return TensorSeries(path.d, self._depth, tuple(level[0] for level in levels))

    # =========================================================================
    # MOMENTS
    # =========================================================================

    def expected_signature(self, ensemble: PathEnsemble) -> TensorSeries:
        """
        Coefficient-wise (weighted) mean of the per-path signatures.

        Raises:
            AppException: VALIDATION_ERROR for an empty ensemble
        """
        if ensemble.n_paths == 0:
            raise validation_error("expected signature of an empty ensemble", "paths")

        levels = self.batch_signatures(ensemble)
        weights = ensemble.weights

        means = [np.ones(1)]
        if weights is None:
            count = ensemble.n_paths
            for level in levels[1:]:
                means.append(np.array([math.fsum(column) / count for column in level.T]))
        else:
            total = math.fsum(weights)
            for level in levels[1:]:
                weighted = level * weights[:, None]
                means.append(np.array([math.fsum(column) / total for column in weighted.T]))

        logger.debug(f"Expected signature of {ensemble.n_paths} paths at depth {self._depth}")
        return TensorSeries(ensemble.d, self._depth, tuple(means))

    def signature_cumulants(self, ensemble: PathEnsemble) -> TensorSeries:
        """Logarithm of the expected signature."""
        return log_series(self.expected_signature(ensemble))


# =============================================================================
# FUNCTIONAL INTERFACE
# =============================================================================

def path_signature(path: SamplePath, depth: int) -> TensorSeries:
    """
    Truncated signature of a piecewise-linear path.

    Example:
        >>> path = SamplePath([0.0, 1.0], [[0.0, 0.0], [2.0, 3.0]])
        >>> path_signature(path, 2).coefficient("2.2")
        4.5
    """
    return SignatureEngine(depth, threads=1).path_signature(path)


def log_signature(path: SamplePath, depth: int) -> TensorSeries:
    """Logarithm of the truncated signature of a path."""
    return log_series(path_signature(path, depth))


def expected_signature(
    ensemble: PathEnsemble,
    depth: int,
    threads: Optional[int] = None,
) -> TensorSeries:
    """Monte-Carlo (or exact weighted) expected signature of an ensemble."""
    return SignatureEngine(depth, threads=threads).expected_signature(ensemble)


def signature_cumulants(
    ensemble: PathEnsemble,
    depth: int,
    threads: Optional[int] = None,
) -> TensorSeries:
    """Signature cumulants: log of the expected signature."""
    return SignatureEngine(depth, threads=threads).signature_cumulants(ensemble)
