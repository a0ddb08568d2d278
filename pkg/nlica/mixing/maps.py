"""
==============================================================================
Parametrized Maps Module
==============================================================================

ParamMap carrier and pointwise application to path ensembles.

Maps act on the grid nodes of each path; the image is read again as a
piecewise-linear path on the same grid.

==============================================================================
"""

from __future__ import annotations

import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Any, Callable, Dict, Optional, Tuple

import numpy as np

from nlica.config import get_settings
from nlica.core.exceptions import (
    degenerate_parameters,
    dimension_mismatch,
    domain_violation,
)
from nlica.signatures.paths import PathEnsemble


# Module logger
logger = logging.getLogger(__name__)

PointMap = Callable[[np.ndarray], np.ndarray]


@dataclass(frozen=True, eq=False)
class ParamMap:
    """
    A parametrized map R^d -> R^d acting on point batches of shape (n, d).

    Attributes:
        family: Registered family name
        params: Parameter vector θ
        dim: Dimension d
        forward: Evaluation rule on (n, d) arrays
        jacobian_fn: Optional analytic Jacobian returning (n, d, d)
        inverse_fn: Optional builder of the inverse map
        domain_fn: Optional mask of points where the map is defined
        options: Family options (rotation, layer shape, ...)

    Example:
        >>> swap = build_map(MapSpec(family="linear", params=[0, 1, 1, 0]))
        >>> swap(np.array([[1.0, 2.0]]))
        array([[2., 1.]])
    """

    family: str
    params: Tuple[float, ...]
    dim: int
    forward: PointMap
    jacobian_fn: Optional[Callable[[np.ndarray], np.ndarray]] = None
    inverse_fn: Optional[Callable[[], "ParamMap"]] = None
    domain_fn: Optional[Callable[[np.ndarray], np.ndarray]] = None
    options: Dict[str, Any] = field(default_factory=dict)

    def __post_init__(self) -> None:
        object.__setattr__(self, "params", tuple(float(p) for p in self.params))

    # =========================================================================
    # EVALUATION
    # =========================================================================

    def _check_points(self, points: np.ndarray) -> np.ndarray:
        points = np.asarray(points, dtype=float)
        if points.ndim != 2 or points.shape[1] != self.dim:
            raise dimension_mismatch(
                f"{self.family} map expects points of shape (n, {self.dim})",
                shape=list(points.shape),
            )
        return points

    def __call__(self, points: np.ndarray) -> np.ndarray:
        return self.forward(self._check_points(points))

    def defined(self, points: np.ndarray) -> np.ndarray:
        """Boolean mask of points inside the map's domain."""
        points = self._check_points(points)
        if self.domain_fn is None:
            return np.ones(points.shape[0], dtype=bool)
        return self.domain_fn(points)

    def jacobian(self, points: np.ndarray, step: Optional[float] = None) -> np.ndarray:
        """
        Jacobian at each point, shape (n, d, d).

        Uses the analytic rule when the family has one, central finite
        differences with the given step otherwise.
        """
        points = self._check_points(points)
        if self.jacobian_fn is not None:
            return self.jacobian_fn(points)

        step = get_settings().jacobian_fd_step if step is None else step
        columns = []
        for j in range(self.dim):
            shift = np.zeros(self.dim)
            shift[j] = step
            columns.append((self.forward(points + shift) - self.forward(points - shift)) / (2.0 * step))
        return np.stack(columns, axis=-1)

    # =========================================================================
    # INVERSE
    # =========================================================================

    @property
    def invertible(self) -> bool:
        return self.inverse_fn is not None

    def inverse(self) -> "ParamMap":
        """
        Analytic inverse map.

        Raises:
            AppException: DEGENERATE_PARAMETERS if the family has no inverse
        """
        if self.inverse_fn is None:
            raise degenerate_parameters(f"{self.family} map has no analytic inverse", family=self.family)
        return self.inverse_fn()


def callable_map(
    fn: PointMap,
    dim: int,
    jacobian: Optional[Callable[[np.ndarray], np.ndarray]] = None,
    family: str = "callable",
) -> ParamMap:
    """Wrap an in-process function of (n, d) arrays as a ParamMap."""
    return ParamMap(family=family, params=(), dim=dim, forward=fn, jacobian_fn=jacobian)


# =============================================================================
# APPLICATION
# =============================================================================

def _evaluate_chunk(m: ParamMap, values: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
    """Image of a (paths, T, d) block and a mask of invalid nodes."""
    flat = values.reshape(-1, m.dim)
    valid = m.defined(flat)
    safe = np.where(valid[:, None], flat, 0.0)
    with np.errstate(all="ignore"):
        image = m.forward(safe)
    valid &= np.all(np.isfinite(image), axis=1)
    return image.reshape(values.shape), ~valid.reshape(values.shape[:2])


def apply_map(
    m: ParamMap,
    ensemble: PathEnsemble,
    threads: Optional[int] = None,
    label: Optional[str] = None,
) -> PathEnsemble:
    """
    Apply a map to every node of every path.

    Args:
        m: Map with m.dim == ensemble.d
        ensemble: Input paths
        threads: Worker cap over path chunks (uses settings if None)
        label: Label of the output ensemble (default: "<label>:<family>")

    Returns:
        Ensemble on the same grid with the same path count

    Raises:
        AppException: DIMENSION_MISMATCH, DOMAIN_VIOLATION naming the first
            offending (path, time_index)
    """
    if m.dim != ensemble.d:
        raise dimension_mismatch("Map and ensemble dimensions differ", map=m.dim, ensemble=ensemble.d)

    settings = get_settings()
    threads = threads or settings.threads
    chunk = settings.chunk_size
    values = ensemble.values
    starts = list(range(0, ensemble.n_paths, chunk))

    if threads <= 1 or len(starts) <= 1:
        parts = [_evaluate_chunk(m, values[start:start + chunk]) for start in starts]
    else:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            parts = list(pool.map(lambda start: _evaluate_chunk(m, values[start:start + chunk]), starts))

    image = np.concatenate([part[0] for part in parts]) if parts else np.empty_like(values)
    invalid = np.concatenate([part[1] for part in parts]) if parts else np.zeros(values.shape[:2], bool)

    if np.any(invalid):
        path, time_index = (int(i) for i in np.argwhere(invalid)[0])
        raise domain_violation(
            f"{m.family} map is undefined at path {path}, time index {time_index}",
            path=path,
            time_index=time_index,
            family=m.family,
        )

    return ensemble.with_values(image, label=label or f"{ensemble.label}:{m.family}")


def compose(outer: ParamMap, inner: ParamMap) -> ParamMap:
    """outer ∘ inner, with the chain-rule Jacobian."""
    if outer.dim != inner.dim:
        raise dimension_mismatch("Composed maps must share d", outer=outer.dim, inner=inner.dim)

    def forward(points: np.ndarray) -> np.ndarray:
        return outer(inner(points))

    def jacobian(points: np.ndarray) -> np.ndarray:
        return outer.jacobian(inner(points)) @ inner.jacobian(points)

    return ParamMap(
        family=f"{outer.family}∘{inner.family}",
        params=outer.params + inner.params,
        dim=outer.dim,
        forward=forward,
        jacobian_fn=jacobian,
    )

