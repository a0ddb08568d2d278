"""
==============================================================================
Mixing Schemas Module
==============================================================================

Serializable description of a parametrized map.

A MapSpec names a registered family, its flat parameter vector and options.
`inverse` selects the family's analytic inverse (the candidate demixing
family of an invertible mixer); `free` lists the parameter indices that an
optimizer may change.

==============================================================================
"""

from typing import Any, Dict, List, Optional

from pydantic import BaseModel, Field, field_validator, model_validator


class MapSpec(BaseModel):
    """
    Parametrized map description.

    Example:
        >>> MapSpec(family="henon", params=[1.4, 0.3], options={"rotation": 45})
    """
    family: str = Field(..., min_length=1, max_length=50)
    params: List[float] = Field(default_factory=list)
    options: Dict[str, Any] = Field(default_factory=dict)
    inverse: bool = False
    free: Optional[List[int]] = None

    @field_validator("family")
    @classmethod
    def normalize_family(cls, v: str) -> str:
        return v.strip().lower()

    @model_validator(mode="after")
    def validate_free(self):
        if self.free is not None:
            if len(set(self.free)) != len(self.free):
                raise ValueError("Duplicate free parameter indices")
            for index in self.free:
                if not 0 <= index < len(self.params):
                    raise ValueError(f"Free index {index} outside the parameter vector")
        return self

    @property
    def free_indices(self) -> List[int]:
        return list(range(len(self.params))) if self.free is None else list(self.free)

    def with_free_values(self, values: List[float]) -> "MapSpec":
        """Copy with the free parameters replaced by the given values."""
        indices = self.free_indices
        if len(values) != len(indices):
            raise ValueError(f"Expected {len(indices)} free values, got {len(values)}")
        params = list(self.params)
        for index, value in zip(indices, values):
            params[index] = float(value)
        return self.model_copy(update={"params": params})

    def free_values(self) -> List[float]:
        return [self.params[i] for i in self.free_indices]
