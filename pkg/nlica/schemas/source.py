"""
==============================================================================
Source Schemas Module
==============================================================================

Configuration schema for the independent source simulators.

Every kind has a fixed set of per-coordinate parameters. Parameters are given
as lists with one entry per coordinate; a single entry is broadcast to all
coordinates, and parameters with defaults may be omitted.

Includes:
- SourceKind / CopulaFamily enums
- SourceSpec with per-kind defaults and domain validation

==============================================================================
"""

import math
from enum import Enum
from typing import Dict, List, Optional

import numpy as np
from pydantic import BaseModel, Field, model_validator


class SourceKind(str, Enum):
    """Supported source process classes."""
    OU = "ou"
    GP_GAMMA_EXP = "gp_gamma_exp"
    FBM = "fbm"
    GBM = "gbm"
    WHITE_NOISE_DRIFT = "white_noise_drift"
    COPULA_MARKOV = "copula_markov"


class CopulaFamily(str, Enum):
    """Copula families of the Markov chain model."""
    CLAYTON = "clayton"
    GUMBEL = "gumbel"
    FRANK = "frank"


# None marks a required parameter
PARAMETER_DEFAULTS: Dict[SourceKind, Dict[str, Optional[float]]] = {
    SourceKind.OU: {"theta": None, "sigma": None, "mu": 0.0, "a": 0.0},
    SourceKind.GP_GAMMA_EXP: {"gamma": None, "alpha": None, "mean": 0.0},
    SourceKind.FBM: {"hurst": None},
    SourceKind.GBM: {"s0": None, "sigma": None, "sigma_slope": 0.0, "drift": 0.0},
    SourceKind.WHITE_NOISE_DRIFT: {
        "drift": 0.0,
        "drift_slope": 0.0,
        "sigma": 1.0,
        "sigma_slope": 0.0,
        "start": 0.0,
    },
    SourceKind.COPULA_MARKOV: {"theta": None},
}


def copula_theta_error(family: CopulaFamily, theta: float) -> Optional[str]:
    """Reason why theta lies outside a copula family's domain, or None."""
    if not math.isfinite(theta):
        return "theta must be finite"
    if family == CopulaFamily.CLAYTON:
        if theta <= -1 or theta == 0 or theta == -0.5:
            return "clayton theta must lie in (-1, inf) without 0 and -1/2"
    elif family == CopulaFamily.GUMBEL:
        if not -1 <= theta <= 1 or theta == 0:
            return "gumbel theta must lie in [-1, 1] without 0"
    elif theta == 0:
        return "frank theta must be nonzero"
    return None


class SourceSpec(BaseModel):
    """
    Independent source process specification.

    The time grid is linspace(0, horizon, n_steps + 1).

    Example:
        >>> spec = SourceSpec(kind="ou", d=2, n_paths=128, n_steps=500, seed=42,
        ...                   params={"theta": [1.0, 2.0], "sigma": [1.0]})
        >>> spec.params["sigma"]
        [1.0, 1.0]
    """
    kind: SourceKind
    d: int = Field(..., ge=1, le=16)
    n_paths: int = Field(..., ge=1)
    n_steps: int = Field(..., ge=1)
    horizon: float = Field(default=1.0, gt=0)
    seed: int = Field(..., ge=0, lt=2 ** 64)
    params: Dict[str, List[float]] = Field(default_factory=dict)
    copula_family: Optional[CopulaFamily] = None
    stationary_start: bool = True

    @model_validator(mode="after")
    def validate_params(self):
        defaults = PARAMETER_DEFAULTS[self.kind]

        unknown = sorted(set(self.params) - set(defaults))
        if unknown:
            raise ValueError(f"Unknown parameters for {self.kind.value}: {', '.join(unknown)}")

        resolved: Dict[str, List[float]] = {}
        for name, default in defaults.items():
            values = self.params.get(name)
            if values is None:
                if default is None:
                    raise ValueError(f"Parameter '{name}' is required for {self.kind.value}")
                values = [default]
            if len(values) == 1:
                values = list(values) * self.d
            if len(values) != self.d:
                raise ValueError(f"Parameter '{name}' needs 1 or {self.d} values, got {len(values)}")
            if not all(math.isfinite(v) for v in values):
                raise ValueError(f"Parameter '{name}' must be finite")
            resolved[name] = [float(v) for v in values]

        self.params = resolved
        self._check_domain()
        return self

    def _check_domain(self) -> None:
        p = self.params
        end = self.horizon

        if self.kind == SourceKind.OU:
            if min(p["theta"]) <= 0 or min(p["sigma"]) <= 0:
                raise ValueError("OU needs theta > 0 and sigma > 0")
        elif self.kind == SourceKind.GP_GAMMA_EXP:
            if any(not 0 < g <= 2 for g in p["gamma"]):
                raise ValueError("gamma must lie in (0, 2]")
            if any(a == 0 for a in p["alpha"]):
                raise ValueError("alpha must be nonzero")
        elif self.kind == SourceKind.FBM:
            if any(not 0 < h < 1 for h in p["hurst"]):
                raise ValueError("hurst must lie in (0, 1)")
        elif self.kind == SourceKind.GBM:
            if min(p["s0"]) <= 0:
                raise ValueError("GBM needs s0 > 0")
            for sigma, slope in zip(p["sigma"], p["sigma_slope"]):
                if sigma <= 0 or sigma + slope * end <= 0:
                    raise ValueError("GBM volatility must stay positive on the horizon")
        elif self.kind == SourceKind.WHITE_NOISE_DRIFT:
            for sigma, slope in zip(p["sigma"], p["sigma_slope"]):
                if sigma <= 0 or sigma + slope * end <= 0:
                    raise ValueError("noise level must stay positive on the horizon")
        elif self.kind == SourceKind.COPULA_MARKOV:
            if self.copula_family is None:
                raise ValueError("copula_markov needs copula_family")
            for theta in p["theta"]:
                reason = copula_theta_error(self.copula_family, theta)
                if reason:
                    raise ValueError(reason)

    # =========================================================================
    # ACCESSORS
    # =========================================================================

    @property
    def times(self) -> np.ndarray:
        return np.linspace(0.0, self.horizon, self.n_steps + 1)

    def coordinate_params(self, coordinate: int) -> Dict[str, float]:
        """Parameters of one coordinate (0-based)."""
        return {name: values[coordinate] for name, values in self.params.items()}
