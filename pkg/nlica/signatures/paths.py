"""
==============================================================================
Sample Paths Module
==============================================================================

Data carriers for piecewise-linear sample paths and path ensembles.

This module implements:
- SamplePath: one d-dimensional path on a strictly increasing time grid
- PathEnsemble: N paths sharing d and the time grid, with optional
  probability weights for exact-enumeration laws
- preprocess: time normalization, centering and unit-amplitude scaling

==============================================================================
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field, replace
from typing import Optional, Sequence

import numpy as np

from nlica.core.exceptions import (
    dimension_mismatch,
    invalid_weights,
    validation_error,
)


# Module logger
logger = logging.getLogger(__name__)


def _readonly(array: np.ndarray) -> np.ndarray:
    array = np.array(array, dtype=float, copy=True)
    array.setflags(write=False)
    return array


def _check_times(times: np.ndarray) -> None:
    if times.ndim != 1 or times.size < 2:
        raise validation_error("a path needs at least 2 time points", "times")
    if not np.all(np.isfinite(times)) or np.any(np.diff(times) <= 0):
        raise validation_error("times must be finite and strictly increasing", "times")


def _normalize_times(times: np.ndarray) -> np.ndarray:
    normalized = (times - times[0]) / (times[-1] - times[0])
    normalized[0], normalized[-1] = 0.0, 1.0
    return normalized


@dataclass(frozen=True, eq=False)
class SamplePath:
    """
    A d-dimensional path observed on a strictly increasing time grid.

    The path is the piecewise-linear interpolant of its nodes.

    Attributes:
        times: Shape (T,), strictly increasing
        values: Shape (T, d)
    """

    times: np.ndarray
    values: np.ndarray

    def __post_init__(self) -> None:
        times = np.asarray(self.times, dtype=float)
        values = np.asarray(self.values, dtype=float)
        if values.ndim == 1:
            values = values[:, None]
        _check_times(times)
        if values.ndim != 2 or values.shape[0] != times.size:
            raise dimension_mismatch(
                "Path values must have one row per time point",
                times=int(times.size),
                rows=int(values.shape[0]),
            )
        object.__setattr__(self, "times", _readonly(times))
        object.__setattr__(self, "values", _readonly(values))

    @property
    def d(self) -> int:
        return int(self.values.shape[1])

    @property
    def increments(self) -> np.ndarray:
        return np.diff(self.values, axis=0)

    def normalized(self) -> "SamplePath":
        """Same values with times rescaled affinely onto [0, 1]."""
        return SamplePath(_normalize_times(np.array(self.times)), self.values)

    def reversed(self) -> "SamplePath":
        """Time reversal: the same trace run backwards on the mirrored grid."""
        mirrored = self.times[-1] + self.times[0] - self.times[::-1]
        return SamplePath(mirrored, self.values[::-1])

    def concatenate(self, other: "SamplePath") -> "SamplePath":
        """
        Path running through self and then through a translate of other.

        The second path is shifted in space so it starts where self ends and
        in time so its grid continues self's grid.
        """
        if other.d != self.d:
            raise dimension_mismatch("Concatenated paths must share d", left=self.d, right=other.d)
        shift = self.values[-1] - other.values[0]
        offset = self.times[-1] - other.times[0]
        times = np.concatenate([self.times, other.times[1:] + offset])
        values = np.concatenate([self.values, other.values[1:] + shift])
        return SamplePath(times, values)


@dataclass(frozen=True, eq=False)
class PathEnsemble:
    """
    N sampled paths on a common grid.

    Attributes:
        times: Shape (T,), strictly increasing
        values: Shape (N, T, d)
        weights: Optional shape (N,) probability weights (non-negative,
            positive total); None means equal weights
        label: Source label carried into artifacts
        seed: Seed the ensemble was simulated from, if any

    Example:
        >>> ensemble = PathEnsemble(np.linspace(0, 1, 3), np.zeros((4, 3, 2)))
        >>> ensemble.n_paths, ensemble.n_times, ensemble.d
        (4, 3, 2)
    """

    times: np.ndarray
    values: np.ndarray
    weights: Optional[np.ndarray] = None
    label: str = ""
    seed: Optional[int] = None
    metadata: dict = field(default_factory=dict)

    def __post_init__(self) -> None:
        times = np.asarray(self.times, dtype=float)
        values = np.asarray(self.values, dtype=float)
        _check_times(times)
        if values.ndim != 3 or values.shape[1] != times.size:
            raise dimension_mismatch(
                "Ensemble values must have shape (N, T, d) matching the grid",
                shape=list(values.shape),
                times=int(times.size),
            )
        if values.shape[2] < 1:
            raise validation_error("paths need at least one coordinate", "d")
        object.__setattr__(self, "times", _readonly(times))
        object.__setattr__(self, "values", _readonly(values))

        if self.weights is not None:
            weights = np.asarray(self.weights, dtype=float).reshape(-1)
            if weights.size != values.shape[0]:
                raise invalid_weights("one weight per path is required")
            if np.any(~np.isfinite(weights)) or np.any(weights < 0) or weights.sum() <= 0:
                raise invalid_weights("weights must be finite, non-negative and not all zero")
            object.__setattr__(self, "weights", _readonly(weights))

    # =========================================================================
    # PROPERTIES
    # =========================================================================

    @property
    def n_paths(self) -> int:
        return int(self.values.shape[0])

    @property
    def n_times(self) -> int:
        return int(self.values.shape[1])

    @property
    def d(self) -> int:
        return int(self.values.shape[2])

    @property
    def increments(self) -> np.ndarray:
        """Shape (N, T-1, d) segment increments."""
        return np.diff(self.values, axis=1)

    # =========================================================================
    # CONSTRUCTION
    # =========================================================================

    @classmethod
    def from_paths(
        cls,
        paths: Sequence[SamplePath],
        weights: Optional[Sequence[float]] = None,
        label: str = "",
    ) -> "PathEnsemble":
        """
        Stack paths sharing a grid into an ensemble.

        Raises:
            AppException: DIMENSION_MISMATCH if grids or dimensions differ
        """
        if not paths:
            raise validation_error("at least one path is required", "paths")
        reference = paths[0]
        for index, path in enumerate(paths[1:], start=1):
            if path.d != reference.d or path.times.size != reference.times.size:
                raise dimension_mismatch("All paths must share d and grid length", path=index)
            if not np.array_equal(path.times, reference.times):
                raise dimension_mismatch("All paths must share the time grid", path=index)
        values = np.stack([path.values for path in paths])
        return cls(reference.times, values, None if weights is None else np.asarray(weights), label)

    def path(self, index: int) -> SamplePath:
        return SamplePath(self.times, self.values[index])

    def subset(self, indices: Sequence[int]) -> "PathEnsemble":
        """Ensemble restricted to the given path indices, in the given order."""
        indices = np.asarray(indices, dtype=int)
        weights = None if self.weights is None else self.weights[indices]
        return replace(self, values=self.values[indices], weights=weights)

    def with_values(self, values: np.ndarray, label: Optional[str] = None) -> "PathEnsemble":
        """Same grid, weights and seed with new values."""
        return replace(self, values=values, label=self.label if label is None else label)

    def normalized_times(self) -> "PathEnsemble":
        """Same values with the grid rescaled affinely onto [0, 1]."""
        return replace(self, times=_normalize_times(np.array(self.times)))


# =============================================================================
# PREPROCESSING
# =============================================================================

def coordinate_means(ensemble: PathEnsemble) -> np.ndarray:
    """Exactly rounded mean of every coordinate over all paths and times."""
    flat = ensemble.values.reshape(-1, ensemble.d)
    count = flat.shape[0]
    return np.array([math.fsum(flat[:, k]) / count for k in range(ensemble.d)])


def preprocess(
    ensemble: PathEnsemble,
    center: bool = True,
    scale: bool = True,
) -> PathEnsemble:
    """
    Normalize times to [0, 1] and optionally center/scale each coordinate.

    Centering subtracts the ensemble mean of each coordinate; scaling then
    divides by the largest absolute value so every coordinate has unit
    amplitude. Coordinates that are identically constant are left unscaled.
    Both reductions are independent of path order.

    Args:
        ensemble: Input ensemble
        center: Subtract per-coordinate means
        scale: Divide by per-coordinate maximal absolute value

    Returns:
        Preprocessed ensemble on the unit time grid
    """
    values = np.array(ensemble.values)

    if center and ensemble.n_paths:
        values = values - coordinate_means(ensemble)

    if scale:
        amplitude = np.max(np.abs(values), axis=(0, 1)) if values.size else np.ones(ensemble.d)
        amplitude = np.where(amplitude > 0, amplitude, 1.0)
        values = values / amplitude

    return replace(ensemble, times=_normalize_times(np.array(ensemble.times)), values=values)
