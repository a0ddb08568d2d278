"""
==============================================================================
Result Schemas Module
==============================================================================

Result payloads written by the library and the CLI.

Includes:
- ContrastResult: independence contrast with per-word terms
- OptimizerReport: best/final parameters, trajectory and status
- ConcordanceMatrix / DiscordanceResult: recovery scores
- ContrastivityReport / MonomialCheck: diagnostics
- RunManifest: reproducibility record of an experiment run

==============================================================================
"""

import math
from enum import Enum
from typing import Dict, List, Literal, Optional, Tuple

from pydantic import BaseModel, Field, field_validator, model_validator


# =============================================================================
# CONTRAST
# =============================================================================

class ContrastResult(BaseModel):
    """Independence contrast of an ensemble."""
    depth: int = Field(..., ge=1)
    mu: int = Field(..., ge=2)
    contrast: float = Field(..., ge=0)
    terms: Dict[str, float] = Field(default_factory=dict)


# =============================================================================
# OPTIMIZATION
# =============================================================================

OptimizerStatus = Literal["completed", "converged", "max_evals", "diverged"]


class TrajectoryPoint(BaseModel):
    """Objective value recorded at one iteration."""
    iteration: int = Field(..., ge=0)
    value: float


class OptimizerReport(BaseModel):
    """
    Outcome of an optimizer run.

    The wall time stays on the in-memory report only; it is excluded from
    serialized output so that persisted reports are reproducible.
    """
    method: str
    best_theta: List[float]
    best_value: float
    final_theta: List[float]
    trajectory: List[TrajectoryPoint] = Field(default_factory=list)
    evaluations: int = Field(default=0, ge=0)
    penalized_evaluations: int = Field(default=0, ge=0)
    status: OptimizerStatus = "completed"
    wall_time_s: float = Field(default=0.0, ge=0, exclude=True)

    @model_validator(mode="after")
    def validate_best_value(self):
        finite = [p.value for p in self.trajectory if math.isfinite(p.value)]
        if finite:
            if self.best_value > min(finite):
                raise ValueError("best_value must be the minimum over the trajectory")
        return self


# =============================================================================
# EVALUATION
# =============================================================================

class ConcordanceMode(str, Enum):
    """How pairs entering Kendall's tau are formed."""
    ENSEMBLE = "ensemble"
    SINGLE_PATH = "single_path"


class ConcordanceMatrix(BaseModel):
    """d×d matrix of averaged absolute Kendall correlations."""
    entries: List[List[float]]
    mode: ConcordanceMode

    @field_validator("entries")
    @classmethod
    def validate_entries(cls, v: List[List[float]]) -> List[List[float]]:
        if not v or any(len(row) != len(v) for row in v):
            raise ValueError("Concordance matrix must be square and non-empty")
        for row in v:
            for entry in row:
                if not 0.0 <= entry <= 1.0:
                    raise ValueError("Concordance entries must lie in [0, 1]")
        return v

    @property
    def d(self) -> int:
        return len(self.entries)


class DiscordanceResult(BaseModel):
    """Monomial discordance and the best-matching permutation."""
    value: float = Field(..., ge=0, le=1)
    permutation: List[int]


class MonomialCheck(BaseModel):
    """Whether a map's Jacobian has one fixed permutation pattern."""
    is_monomial: bool
    permutation: Optional[List[int]] = None


# =============================================================================
# DIAGNOSTICS
# =============================================================================

class ContrastivityReport(BaseModel):
    """Witness search for distinct covariance ratios across coordinates."""
    kind: str
    satisfied: bool
    xi_vector: List[float] = Field(default_factory=list)
    pairs: Optional[Tuple[Tuple[float, float], Tuple[float, float], Tuple[float, float]]] = None


# =============================================================================
# RUN MANIFEST
# =============================================================================

class RunManifest(BaseModel):
    """Reproducibility record written next to experiment artifacts."""
    name: str
    config_hash: str
    seed: int
    versions: Dict[str, str]
    stage_timings_ms: Dict[str, float] = Field(default_factory=dict)
    artifact_paths: Dict[str, str] = Field(default_factory=dict)
    artifact_hashes: Dict[str, str] = Field(default_factory=dict)
    manifest_hash: str = ""
