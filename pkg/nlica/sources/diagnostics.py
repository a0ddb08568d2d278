"""
==============================================================================
Source Diagnostics Module
==============================================================================

Numerical checks of the temporal-structure conditions under which
independence of a demixed signal pins the demixing map down.

This module implements:
- BivariateDensityGrid plus Gaussian, copula and flat-diagonal fixtures
- mixed_log_derivative: ∂x∂y log ζ by central finite differences
- separability_classify: separable / vanishing on the diagonal / regular
- gamma_contrastivity_check: search for time pairs whose covariance ratios
  differ across coordinates

Contrastivity:
-------------
For a Gaussian coordinate with covariance κ, the mixed log-derivative of the
bivariate density of (X_s, X_t) is the constant

    ξ(s, t) = κ(s, t) / (κ(s, s)κ(t, t) - κ(s, t)²)

A witness is a pair of time pairs (p0, p1) such that the ratios
Ξ_i = ξ_i(p1)/ξ_i(p0) are pairwise distinct across coordinates i.

==============================================================================
"""

from __future__ import annotations

import itertools
import logging
from dataclasses import dataclass
from enum import Enum
from typing import List, Optional, Sequence, Tuple

import numpy as np

from nlica.config import get_settings
from nlica.core.exceptions import dimension_mismatch, domain_violation, validation_error
from nlica.schemas.results import ContrastivityReport
from nlica.schemas.source import SourceSpec

from .copulas import FamilyLike, copula_density
from .kernels import covariance_kernel


# Module logger
logger = logging.getLogger(__name__)

# Share of the diagonal band that must vanish for the diagonal class
DIAGONAL_VANISHING_SHARE = 0.9

# Band half-width in units of the largest grid spacing
DIAGONAL_BAND_WIDTH = 1.5

TimePair = Tuple[float, float]


class SeparabilityClass(str, Enum):
    """Outcome of separability_classify."""
    SEPARABLE = "separable"
    NON_SEPARABLE_DIAG_VANISHING = "non_separable_diag_vanishing"
    REGULARLY_NON_SEPARABLE = "regularly_non_separable"


# =============================================================================
# DENSITY GRIDS
# =============================================================================

@dataclass(frozen=True, eq=False)
class BivariateDensityGrid:
    """
    Values of a bivariate density on a rectangular grid.

    Attributes:
        x: Shape (nx,), strictly increasing
        y: Shape (ny,), strictly increasing
        values: Shape (nx, ny), values[i, j] = ζ(x[i], y[j])
    """

    x: np.ndarray
    y: np.ndarray
    values: np.ndarray

    def __post_init__(self) -> None:
        x = np.asarray(self.x, dtype=float)
        y = np.asarray(self.y, dtype=float)
        values = np.asarray(self.values, dtype=float)
        for name, axis in (("x", x), ("y", y)):
            if axis.ndim != 1 or axis.size < 3:
                raise validation_error("grid axes need at least 3 points", name)
            if np.any(np.diff(axis) <= 0):
                raise validation_error("grid axes must be strictly increasing", name)
        if values.shape != (x.size, y.size):
            raise dimension_mismatch("Grid values must have shape (nx, ny)", shape=list(values.shape))
        object.__setattr__(self, "x", x)
        object.__setattr__(self, "y", y)
        object.__setattr__(self, "values", values)


def gaussian_density_grid(
    rho: float,
    x: Sequence[float],
    y: Sequence[float],
) -> BivariateDensityGrid:
    """Standard bivariate normal density with correlation rho on a grid."""
    if not -1 < rho < 1:
        raise validation_error("rho must lie in (-1, 1)", "rho")
    gx, gy = np.meshgrid(np.asarray(x, dtype=float), np.asarray(y, dtype=float), indexing="ij")
    quadratic = (gx ** 2 - 2 * rho * gx * gy + gy ** 2) / (1 - rho ** 2)
    values = np.exp(-0.5 * quadratic) / (2 * np.pi * np.sqrt(1 - rho ** 2))
    return BivariateDensityGrid(x, y, values)


def copula_density_grid(
    family: FamilyLike,
    theta: float,
    x: Sequence[float],
    y: Sequence[float],
) -> BivariateDensityGrid:
    """Copula density of a family on a grid inside (0, 1)²."""
    gx, gy = np.meshgrid(np.asarray(x, dtype=float), np.asarray(y, dtype=float), indexing="ij")
    return BivariateDensityGrid(x, y, copula_density(family, theta, gx, gy))


def diagonal_flat_density_grid(x: Sequence[float], y: Sequence[float]) -> BivariateDensityGrid:
    """
    exp(φ0) with φ0(x, y) = exp(-1/(x-y)²) off the diagonal and 0 on it.

    Its mixed log-derivative vanishes to all orders on the diagonal but not
    away from it.
    """
    gx, gy = np.meshgrid(np.asarray(x, dtype=float), np.asarray(y, dtype=float), indexing="ij")
    gap = gx - gy
    off = gap != 0
    phi0 = np.where(off, np.exp(-1.0 / np.where(off, gap, 1.0) ** 2), 0.0)
    return BivariateDensityGrid(x, y, np.exp(phi0))


# =============================================================================
# SEPARABILITY
# =============================================================================

def mixed_log_derivative(grid: BivariateDensityGrid) -> np.ndarray:
    """
    ∂x∂y log ζ on interior nodes by second-order central differences.

    Returns:
        Shape (nx-2, ny-2)

    Raises:
        AppException: DOMAIN_VIOLATION for non-positive density values

    Example:
        >>> xi = mixed_log_derivative(gaussian_density_grid(0.5, grid, grid))
        >>> np.allclose(xi, 2 / 3)
        True
    """
    if np.any(~(grid.values > 0)):
        raise domain_violation("density must be positive on the grid")
    log_values = np.log(grid.values)
    along_x = np.gradient(log_values, grid.x, axis=0)
    mixed = np.gradient(along_x, grid.y, axis=1)
    return mixed[1:-1, 1:-1]


def separability_classify(
    grid: BivariateDensityGrid,
    tol: Optional[float] = None,
) -> SeparabilityClass:
    """
    Classify a density by where its mixed log-derivative vanishes.

    Args:
        grid: Density grid
        tol: Magnitude under which a value counts as zero (uses settings if None)

    Returns:
        SEPARABLE when every value vanishes, NON_SEPARABLE_DIAG_VANISHING when
        at least 90% of the diagonal band |x - y| <= 1.5·spacing vanishes,
        REGULARLY_NON_SEPARABLE otherwise
    """
    tol = get_settings().separability_tol if tol is None else tol
    xi = mixed_log_derivative(grid)
    small = np.abs(xi) <= tol

    if np.all(small):
        return SeparabilityClass.SEPARABLE

    spacing = max(np.max(np.diff(grid.x)), np.max(np.diff(grid.y)))
    inner_x, inner_y = np.meshgrid(grid.x[1:-1], grid.y[1:-1], indexing="ij")
    band = np.abs(inner_x - inner_y) <= DIAGONAL_BAND_WIDTH * spacing

    if np.any(band) and np.mean(small[band]) >= DIAGONAL_VANISHING_SHARE:
        return SeparabilityClass.NON_SEPARABLE_DIAG_VANISHING
    return SeparabilityClass.REGULARLY_NON_SEPARABLE


# =============================================================================
# CONTRASTIVITY
# =============================================================================

def default_pair_grid(horizon: float = 1.0) -> List[TimePair]:
    """All (s, t), s < t, from {k/20 · horizon : k = 1..19}."""
    points = [k / 20 * horizon for k in range(1, 20)]
    return list(itertools.combinations(points, 2))


def _xi_matrix(spec: SourceSpec, pairs: np.ndarray) -> np.ndarray:
    """ξ_i(s, t) for every coordinate and pair, NaN where undefined."""
    s, t = pairs[:, 0], pairs[:, 1]
    rows = []
    for coordinate in range(spec.d):
        kernel = covariance_kernel(spec, coordinate)
        cross = kernel(s, t)
        denominator = kernel(s, s) * kernel(t, t) - cross ** 2
        with np.errstate(divide="ignore", invalid="ignore"):
            xi = cross / denominator
        rows.append(np.where(np.isfinite(xi) & (denominator > 0), xi, np.nan))
    return np.array(rows)


def _distinct(values: np.ndarray, gap_tol: float) -> np.ndarray:
    """Columns whose entries are pairwise distinct by relative gap."""
    ordered = np.sort(values, axis=0)
    gaps = np.diff(ordered, axis=0)
    scale = np.maximum(np.abs(ordered[1:]), np.abs(ordered[:-1]))
    return np.all(gaps > gap_tol * scale, axis=0)


def gamma_contrastivity_check(
    spec: SourceSpec,
    pair_grid: Optional[Sequence[TimePair]] = None,
    gap_tol: Optional[float] = None,
) -> ContrastivityReport:
    """
    Search for time pairs whose covariance ratios separate the coordinates.

    Candidates are scanned in grid order (p0 first, then p1), with p2 = p0.

    Args:
        spec: Source spec of a Gaussian kind (copula_markov is unsupported)
        pair_grid: Candidate (s, t) pairs with s < t (default: twentieths
            of the horizon)
        gap_tol: Relative distinctness tolerance (uses settings if None)

    Returns:
        ContrastivityReport with the first witness, or satisfied=False

    Raises:
        AppException: UNSUPPORTED_KIND, VALIDATION_ERROR for bad pairs

    Example:
        >>> report = gamma_contrastivity_check(fbm_spec, [(0.1, 0.2), (0.2, 0.4)])
        >>> report.xi_vector  # (0.5**0.6, 0.5**1.4)
        [0.659..., 0.378...]
    """
    gap_tol = get_settings().contrastivity_gap_tol if gap_tol is None else gap_tol
    pairs = default_pair_grid(spec.horizon) if pair_grid is None else [tuple(p) for p in pair_grid]
    if len(pairs) < 2:
        raise validation_error("at least two time pairs are required", "pairs")
    for s, t in pairs:
        if not 0 <= s < t:
            raise validation_error("time pairs need 0 <= s < t", "pairs")

    table = np.asarray(pairs, dtype=float)
    xi = _xi_matrix(spec, table)
    first_vector: Optional[List[float]] = None

    for p0 in range(len(pairs)):
        base = xi[:, p0]
        if np.any(np.isnan(base)) or np.any(base == 0):
            continue
        ratios = xi / base[:, None]
        usable = ~np.any(np.isnan(ratios), axis=0)
        usable[p0] = False
        if first_vector is None and np.any(usable):
            first_vector = ratios[:, np.argmax(usable)].tolist()
        hits = np.flatnonzero(usable & _distinct(ratios, gap_tol))
        if hits.size:
            p1 = int(hits[0])
            witness = (pairs[p0], pairs[p1], pairs[p0])
            logger.debug(f"Contrastivity witness for {spec.kind.value}: {witness}")
            return ContrastivityReport(
                kind=spec.kind.value,
                satisfied=True,
                xi_vector=ratios[:, p1].tolist(),
                pairs=witness,
            )

    logger.debug(f"No contrastivity witness for {spec.kind.value} among {len(pairs)} pairs")
    return ContrastivityReport(kind=spec.kind.value, satisfied=False, xi_vector=first_vector or [])
