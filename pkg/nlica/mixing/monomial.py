"""
Monomial-transformation test.

A map is monomial on a connected region when it permutes the coordinates and
acts on each one by a strictly monotone function. Equivalently its Jacobian
has, at every point, exactly one non-zero entry per row and per column, in
the same positions everywhere.
"""

from __future__ import annotations

import logging
from typing import Optional

import numpy as np

from nlica.config import get_settings
from nlica.core.exceptions import singular_jacobian
from nlica.schemas.results import MonomialCheck

from .maps import ParamMap


# Module logger
logger = logging.getLogger(__name__)

# |det J| at or below this value is singular
SINGULAR_TOL = 1e-12


def monomial_check(
    m: ParamMap,
    points: np.ndarray,
    tol: Optional[float] = None,
    fd_step: Optional[float] = None,
) -> MonomialCheck:
    """
    Test whether a map has a constant permutation Jacobian pattern.

    Args:
        m: Map to test
        points: Grid of shape (n, d) covering a connected region
        tol: Entries above this magnitude count as non-zero (uses settings
            if None)
        fd_step: Central-difference step when m has no analytic Jacobian

    Returns:
        MonomialCheck; permutation[i] is the input coordinate driving
        output i

    Raises:
        AppException: SINGULAR_JACOBIAN at the first singular grid point

    Example:
        >>> check = monomial_check(swap_and_stretch, grid)
        >>> check.is_monomial, check.permutation
        (True, [1, 0])
    """
    tol = get_settings().monomial_tol if tol is None else tol
    points = np.atleast_2d(np.asarray(points, dtype=float))
    jacobians = m.jacobian(points, step=fd_step)

    determinants = np.abs(np.linalg.det(jacobians))
    singular = np.flatnonzero(determinants <= SINGULAR_TOL)
    if singular.size:
        raise singular_jacobian(int(singular[0]))

    support = np.abs(jacobians) > tol
    one_per_row = np.all(support.sum(axis=2) == 1, axis=1)
    one_per_column = np.all(support.sum(axis=1) == 1, axis=1)
    if not np.all(one_per_row & one_per_column):
        return MonomialCheck(is_monomial=False)

    patterns = np.argmax(support, axis=2)
    if np.any(patterns != patterns[0]):
        logger.debug(f"{m.family} map changes its permutation pattern across the grid")
        return MonomialCheck(is_monomial=False)

    return MonomialCheck(is_monomial=True, permutation=patterns[0].tolist())
