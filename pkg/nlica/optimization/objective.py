"""
==============================================================================
Separation Objective Module
==============================================================================

θ ↦ contrast of g_θ(X): the quantity whose minimizers demix X.

Evaluation failures that an optimizer can step away from (map undefined on
the data, degenerate parameters, a coordinate collapsing to a constant) are
turned into a large finite penalty with a flag instead of an exception.

==============================================================================
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass
from typing import Callable, Optional, Sequence

import numpy as np

from nlica.config import get_settings
from nlica.core.exceptions import AppException, mu_exceeds_depth, validation_error
from nlica.mixing.families import build_map
from nlica.mixing.maps import ParamMap, apply_map
from nlica.schemas.mixing import MapSpec
from nlica.signatures.contrast import contrast_ic
from nlica.signatures.paths import PathEnsemble


# Module logger
logger = logging.getLogger(__name__)

# Error codes that become a penalty value
PENALIZED_CODES = frozenset({
    "DOMAIN_VIOLATION",
    "DEGENERATE_PARAMETERS",
    "DEGENERATE_NORMALIZATION",
})


@dataclass(frozen=True)
class ObjectiveValue:
    """One objective evaluation."""
    value: float
    penalized: bool = False
    reason: Optional[str] = None


class Objective:
    """
    Independence contrast of a candidate family applied to a mixture.

    Attributes:
        mixture: Observed ensemble X
        family: Candidate MapSpec; θ fills its free parameters
        depth: Signature depth M
        mu: Maximal cross-word length (<= depth)

    Example:
        >>> objective = Objective(mixture, MapSpec(family="henon", params=[1.4, 0.3],
        ...                       options={"rotation": 45}, inverse=True), depth=5, mu=5)
        >>> objective([1.4, 0.3]) < objective([1.0, 0.2])
        True
    """

    def __init__(
        self,
        mixture: PathEnsemble,
        family: MapSpec,
        depth: int,
        mu: int,
        center: bool = True,
        scale: bool = True,
        penalty: Optional[float] = None,
        epsilon: Optional[float] = None,
    ) -> None:
        if mu > depth:
            raise mu_exceeds_depth(mu, depth)
        if mixture.d < 2:
            raise validation_error("the contrast needs d >= 2", "d")

        self._mixture = mixture
        self._family = family
        self._depth = depth
        self._mu = mu
        self._center = center
        self._scale = scale
        self._penalty = get_settings().domain_penalty if penalty is None else penalty
        self._epsilon = epsilon

        # Fails fast on unknown families and dimension mismatches
        build_map(family, dim=mixture.d)

    # =========================================================================
    # PROPERTIES
    # =========================================================================

    @property
    def mixture(self) -> PathEnsemble:
        return self._mixture

    @property
    def family(self) -> MapSpec:
        return self._family

    @property
    def n_paths(self) -> int:
        return self._mixture.n_paths

    @property
    def n_params(self) -> int:
        return len(self._family.free_indices)

    @property
    def penalty(self) -> float:
        return self._penalty

    # =========================================================================
    # EVALUATION
    # =========================================================================

    def map_for(self, theta: Sequence[float]) -> ParamMap:
        """Candidate map at θ."""
        theta = [float(v) for v in theta]
        if len(theta) != self.n_params:
            raise validation_error(f"theta needs {self.n_params} values, got {len(theta)}", "theta")
        return build_map(self._family.with_free_values(theta), dim=self._mixture.d)

    def estimate(self, theta: Sequence[float]) -> PathEnsemble:
        """Demixed ensemble g_θ(X)."""
        return apply_map(self.map_for(theta), self._mixture, threads=1, label="estimate")

    def evaluate(self, theta: Sequence[float]) -> ObjectiveValue:
        """
        Contrast at θ, or the penalty with the reason when θ is not admissible.
        """
        try:
            demixed = self.estimate(theta)
            result = contrast_ic(
                demixed,
                self._depth,
                self._mu,
                center=self._center,
                scale=self._scale,
                epsilon=self._epsilon,
                threads=1,
            )
        except AppException as exc:
            if exc.code not in PENALIZED_CODES:
                raise
            logger.debug(f"Penalized θ={list(theta)}: {exc.code}")
            return ObjectiveValue(self._penalty, True, exc.code)

        if not math.isfinite(result.contrast):
            return ObjectiveValue(self._penalty, True, "NON_FINITE")
        return ObjectiveValue(result.contrast)

    def __call__(self, theta: Sequence[float]) -> float:
        return self.evaluate(theta).value

    def restricted(self, indices: Sequence[int]) -> "Objective":
        """Same objective on a subset of the paths."""
        return Objective(
            self._mixture.subset(indices),
            self._family,
            self._depth,
            self._mu,
            center=self._center,
            scale=self._scale,
            penalty=self._penalty,
            epsilon=self._epsilon,
        )


class FunctionObjective:
    """
    Adapter exposing a plain function through the objective interface.

    Subsampling is a no-op; used for analytic test functions.
    """

    def __init__(self, fn: Callable[[np.ndarray], float], n_paths: int = 1) -> None:
        self._fn = fn
        self._n_paths = n_paths

    @property
    def n_paths(self) -> int:
        return self._n_paths

    def evaluate(self, theta: Sequence[float]) -> ObjectiveValue:
        return ObjectiveValue(float(self._fn(np.asarray(theta, dtype=float))))

    def __call__(self, theta: Sequence[float]) -> float:
        return self.evaluate(theta).value

    def restricted(self, indices: Sequence[int]) -> "FunctionObjective":
        return self
