"""
==============================================================================
Experiment Schemas Module
==============================================================================

Configuration of a full simulate → mix → separate → evaluate run.

A single seed drives every random stream of the run; it is copied into the
source spec when the source block does not carry its own.

==============================================================================
"""

from typing import Any, Optional

from pydantic import BaseModel, Field, field_validator, model_validator

from .mixing import MapSpec
from .optimizer import OptimizerConfig, OptimizerMethod
from .results import ConcordanceMode
from .source import SourceSpec


class EvaluationConfig(BaseModel):
    """How the estimate is scored against the sources."""
    mode: Optional[ConcordanceMode] = None
    discordance_grid: bool = True


class ExperimentConfig(BaseModel):
    """
    Complete experiment description.

    Example:
        >>> config = ExperimentConfig.model_validate_json(path.read_text())
        >>> config.mu <= config.depth
        True
    """
    name: str = Field(..., min_length=1, max_length=100)
    description: str = ""
    seed: int = Field(..., ge=0, lt=2 ** 64)
    source: SourceSpec
    mixing: MapSpec
    candidate: MapSpec
    optimizer: OptimizerConfig = Field(default_factory=OptimizerConfig)
    depth: int = Field(default=5, ge=2, le=8)
    mu: int = Field(default=5, ge=2)
    center: bool = True
    scale: bool = True
    scale_sources: bool = True
    evaluation: EvaluationConfig = Field(default_factory=EvaluationConfig)
    output_directory: Optional[str] = None

    @model_validator(mode="before")
    @classmethod
    def propagate_seed(cls, data: Any) -> Any:
        if isinstance(data, dict) and isinstance(data.get("source"), dict):
            source = dict(data["source"])
            source.setdefault("seed", data.get("seed"))
            data = {**data, "source": source}
        return data

    @field_validator("name")
    @classmethod
    def validate_name(cls, v: str) -> str:
        v = v.strip()
        if not v.replace("_", "").replace("-", "").isalnum():
            raise ValueError("Name may contain letters, digits, '-' and '_' only")
        return v

    @model_validator(mode="after")
    def validate_consistency(self):
        if self.mu > self.depth:
            raise ValueError(f"mu exceeds depth (mu={self.mu}, depth={self.depth})")

        n_free = len(self.candidate.free_indices)
        if self.optimizer.method == OptimizerMethod.GRID:
            if len(self.optimizer.grid.axes) != n_free:
                raise ValueError(f"grid needs one axis per free parameter ({n_free})")
        theta0 = self.optimizer.theta0
        if theta0 is not None and len(theta0) != n_free:
            raise ValueError(f"theta0 needs {n_free} values")
        return self
