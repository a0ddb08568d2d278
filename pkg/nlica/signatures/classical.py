"""
==============================================================================
Classical Cross-Cumulant Contrast
==============================================================================

Exact cross-cumulant contrast of a finite-support random vector.

For a law given by weighted atoms, raw moments are finite sums, and joint
cumulants follow from the moment-cumulant recursion

    κ(I) = m(I) - sum_{B ∋ first(I), B ⊊ I} κ(B) · m(I \\ B)

over index positions. The contrast sums the squares of the standardized
cumulants of every non-constant index multiset of order 2..r. It vanishes
exactly for independent coordinates and serves as an oracle for the
signature contrast evaluated on linear paths.

==============================================================================
"""

from __future__ import annotations

import itertools
import logging
import math
from typing import Dict, Optional, Sequence, Tuple

import numpy as np

from nlica.config import get_settings
from nlica.core.exceptions import degenerate_normalization, invalid_weights, validation_error


# Module logger
logger = logging.getLogger(__name__)

# Tolerance on the total probability mass
WEIGHT_SUM_TOL = 1e-12


class FiniteLawCumulants:
    """
    Joint moments and cumulants of a weighted finite point set.

    Attributes:
        points: Shape (n, d) centered atoms
        weights: Shape (n,) probabilities

    Example:
        >>> law = FiniteLawCumulants([[1, 1], [-1, -1]], [0.5, 0.5])
        >>> law.cumulant((0, 1))
        1.0
    """

    def __init__(self, points: Sequence[Sequence[float]], weights: Sequence[float]) -> None:
        points = np.asarray(points, dtype=float)
        weights = np.asarray(weights, dtype=float).reshape(-1)
        if points.ndim == 1:
            points = points[:, None]
        if points.shape[0] != weights.size or weights.size == 0:
            raise invalid_weights("one weight per atom is required")
        if np.any(~np.isfinite(weights)) or np.any(weights < 0):
            raise invalid_weights("weights must be finite and non-negative")
        if abs(math.fsum(weights) - 1.0) > WEIGHT_SUM_TOL:
            raise invalid_weights("weights must sum to 1")

        mean = np.array([math.fsum(weights * points[:, k]) for k in range(points.shape[1])])
        self._points = points - mean
        self._weights = weights
        self._moments: Dict[Tuple[int, ...], float] = {(): 1.0}
        self._cumulants: Dict[Tuple[int, ...], float] = {}

    @property
    def d(self) -> int:
        return int(self._points.shape[1])

    def moment(self, index: Tuple[int, ...]) -> float:
        """Raw joint moment E[prod_k X_{index_k}] of the centered law."""
        key = tuple(sorted(index))
        if key not in self._moments:
            product = np.prod(self._points[:, list(key)], axis=1)
            self._moments[key] = math.fsum(self._weights * product)
        return self._moments[key]

    def cumulant(self, index: Tuple[int, ...]) -> float:
        """Joint cumulant by recursion over position subsets containing the first index."""
        key = tuple(sorted(index))
        if key in self._cumulants:
            return self._cumulants[key]

        first, rest = key[0], key[1:]
        value = self.moment(key)
        positions = range(len(rest))
        for size in range(len(rest)):
            for chosen in itertools.combinations(positions, size):
                block = (first,) + tuple(rest[p] for p in chosen)
                remainder = tuple(rest[p] for p in positions if p not in chosen)
                value -= self.cumulant(block) * self.moment(remainder)

        self._cumulants[key] = value
        return value

    def variances(self) -> np.ndarray:
        return np.array([self.cumulant((k, k)) for k in range(self.d)])


def classical_contrast(
    points: Sequence[Sequence[float]],
    weights: Sequence[float],
    order: int,
    epsilon: Optional[float] = None,
) -> float:
    """
    Sum of squared standardized cross cumulants of orders 2..order.

    Each unordered index multiset with at least two distinct coordinates is
    counted once.

    Args:
        points: Atoms of the law, shape (n, d)
        weights: Atom probabilities summing to 1
        order: Maximal cumulant order r (>= 2)
        epsilon: Variances at or below this value are degenerate (uses
            settings if None)

    Returns:
        Non-negative contrast value

    Raises:
        AppException: INVALID_WEIGHTS, VALIDATION_ERROR (order < 2),
            DEGENERATE_NORMALIZATION (zero variance)

    Example:
        >>> classical_contrast([[1, 1], [-1, -1]], [0.5, 0.5], order=2)
        1.0
    """
    if order < 2:
        raise validation_error("order must be at least 2", "order")
    law = FiniteLawCumulants(points, weights)
    epsilon = get_settings().norm_epsilon if epsilon is None else epsilon

    variances = law.variances()
    for k, value in enumerate(variances, start=1):
        if not value > epsilon:
            raise degenerate_normalization(k, float(value))
    scale = np.sqrt(variances)

    squares = []
    for r in range(2, order + 1):
        for index in itertools.combinations_with_replacement(range(law.d), r):
            if len(set(index)) < 2:
                continue
            standardized = law.cumulant(index) / float(np.prod(scale[list(index)]))
            squares.append(standardized ** 2)

    return math.fsum(squares)
