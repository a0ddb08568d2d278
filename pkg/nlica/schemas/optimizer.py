"""
==============================================================================
Optimizer Schemas Module
==============================================================================

Options of the three separation optimizers.

Includes:
- AxisSpec: one lattice axis, accepted as "start:stop:count"
- GridOptions / NelderMeadOptions / SGDOptions
- OptimizerConfig: method choice plus its options

==============================================================================
"""

from enum import Enum
from typing import Any, List, Optional

import numpy as np
from pydantic import BaseModel, Field, field_validator, model_validator


class OptimizerMethod(str, Enum):
    """Available optimizers."""
    GRID = "grid"
    NELDER_MEAD = "nelder_mead"
    SGD = "sgd"


class AxisSpec(BaseModel):
    """Evenly spaced lattice axis including both ends."""
    start: float
    stop: float
    count: int = Field(..., ge=1, le=1000)

    @model_validator(mode="before")
    @classmethod
    def parse_string(cls, data: Any) -> Any:
        if isinstance(data, str):
            parts = data.split(":")
            if len(parts) != 3:
                raise ValueError("Axis must look like start:stop:count")
            start, stop, count = parts
            return {"start": start, "stop": stop, "count": count}
        return data

    @model_validator(mode="after")
    def validate_range(self):
        if self.count > 1 and not self.stop > self.start:
            raise ValueError("Axis stop must exceed start")
        return self

    def values(self) -> np.ndarray:
        if self.count == 1:
            return np.array([self.start])
        return np.linspace(self.start, self.stop, self.count)


class GridOptions(BaseModel):
    """Cartesian lattice over the free parameters."""
    axes: List[AxisSpec] = Field(..., min_length=1)


class NelderMeadOptions(BaseModel):
    """Simplex search options."""
    max_evals: int = Field(default=400, ge=0)
    xatol: float = Field(default=1e-6, gt=0)
    initial_step: Optional[float] = Field(default=None, gt=0)


class SGDOptions(BaseModel):
    """Adam on finite-difference gradients over path subsamples."""
    lr: float = Field(default=0.01, ge=0)
    iterations: int = Field(default=200, ge=0)
    batch_paths: Optional[int] = Field(default=None, ge=1)
    fd_step: Optional[float] = Field(default=None, gt=0)
    l2: float = Field(default=1e-4, ge=0)
    beta1: float = Field(default=0.9, ge=0, lt=1)
    beta2: float = Field(default=0.999, ge=0, lt=1)
    eps: float = Field(default=1e-8, gt=0)


class OptimizerConfig(BaseModel):
    """Optimizer choice for an experiment."""
    method: OptimizerMethod = OptimizerMethod.NELDER_MEAD
    theta0: Optional[List[float]] = None
    grid: Optional[GridOptions] = None
    nelder_mead: NelderMeadOptions = Field(default_factory=NelderMeadOptions)
    sgd: SGDOptions = Field(default_factory=SGDOptions)

    @field_validator("theta0")
    @classmethod
    def validate_theta0(cls, v: Optional[List[float]]) -> Optional[List[float]]:
        if v is not None and not np.all(np.isfinite(v)):
            raise ValueError("theta0 must be finite")
        return v

    @model_validator(mode="after")
    def validate_method_options(self):
        if self.method == OptimizerMethod.GRID and self.grid is None:
            raise ValueError("grid method needs grid options")
        return self
