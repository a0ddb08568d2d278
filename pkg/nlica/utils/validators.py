"""
==============================================================================
Flag Validation Utilities Module
==============================================================================

Parsers for the compact command-line value formats.

This module implements:
- FloatListValidator: "1.4,0.3" → [1.4, 0.3]
- ParamsValidator: ["theta=0.5,1", "sigma=1"] → {"theta": [0.5, 1.0], ...}
- OptionsValidator: ["rotation=45", "shape=2,4,2"] → JSON-typed option map

Validation Rules:
----------------
- Numbers must be finite
- Keys are identifiers and may appear once
- Option values parse as JSON when possible ("45" → 45, "true" → True),
  comma lists become lists, anything else stays a string

==============================================================================
"""

from __future__ import annotations

import json
import math
import re
from typing import Any, Dict, List, Optional, Sequence, Tuple

from nlica.core.exceptions import validation_error


class FloatListValidator:
    """
    Validator for comma-separated float lists.

    Example:
        >>> FloatListValidator().validate("1.4, 0.3")
        (True, [1.4, 0.3], None)
    """

    def validate(self, text: str) -> Tuple[bool, Optional[List[float]], Optional[str]]:
        """
        Parse a comma-separated list of finite floats.

        Returns:
            Tuple of (is_valid, values, error_message)
        """
        if text is None or not text.strip():
            return False, None, "A list of numbers is required"
        values: List[float] = []
        for part in text.split(","):
            try:
                value = float(part.strip())
            except ValueError:
                return False, None, f"'{part.strip()}' is not a number"
            if not math.isfinite(value):
                return False, None, "Numbers must be finite"
            values.append(value)
        return True, values, None


class ParamsValidator:
    """
    Validator for repeated key=v1,v2 parameter flags.

    Example:
        >>> ParamsValidator().validate(["theta=0.5,1.0", "sigma=1"])
        (True, {'theta': [0.5, 1.0], 'sigma': [1.0]}, None)
    """

    KEY_PATTERN = re.compile(r"^[a-z][a-z0-9_]*$")

    def __init__(self) -> None:
        self._numbers = FloatListValidator()

    def validate(self, items: Sequence[str]) -> Tuple[bool, Optional[Dict[str, List[float]]], Optional[str]]:
        params: Dict[str, List[float]] = {}
        for item in items or []:
            key, sep, raw = item.partition("=")
            key = key.strip().lower()
            if not sep or not self.KEY_PATTERN.match(key):
                return False, None, f"'{item}' must look like name=v1,v2"
            if key in params:
                return False, None, f"Parameter '{key}' given twice"
            is_valid, values, error = self._numbers.validate(raw)
            if not is_valid:
                return False, None, f"{key}: {error}"
            params[key] = values
        return True, params, None


class OptionsValidator:
    """Validator for repeated key=value option flags."""

    KEY_PATTERN = re.compile(r"^[a-z][a-z0-9_]*$")

    @staticmethod
    def _parse_value(raw: str) -> Any:
        raw = raw.strip()
        try:
            return json.loads(raw)
        except json.JSONDecodeError:
            pass
        if "," in raw:
            return [OptionsValidator._parse_value(part) for part in raw.split(",")]
        return raw

    def validate(self, items: Sequence[str]) -> Tuple[bool, Optional[Dict[str, Any]], Optional[str]]:
        options: Dict[str, Any] = {}
        for item in items or []:
            key, sep, raw = item.partition("=")
            key = key.strip().lower()
            if not sep or not self.KEY_PATTERN.match(key):
                return False, None, f"'{item}' must look like name=value"
            if key in options:
                return False, None, f"Option '{key}' given twice"
            options[key] = self._parse_value(raw)
        return True, options, None


# =============================================================================
# RAISING HELPERS
# =============================================================================

def parse_floats(text: str, field: str) -> List[float]:
    """Parse a float list or raise VALIDATION_ERROR naming the flag."""
    is_valid, values, error = FloatListValidator().validate(text)
    if not is_valid:
        raise validation_error(error, field)
    return values


def parse_params(items: Sequence[str], field: str = "param") -> Dict[str, List[float]]:
    """Parse key=values flags or raise VALIDATION_ERROR naming the flag."""
    is_valid, params, error = ParamsValidator().validate(items)
    if not is_valid:
        raise validation_error(error, field)
    return params


def parse_options(items: Sequence[str], field: str = "option") -> Dict[str, Any]:
    """Parse key=value option flags or raise VALIDATION_ERROR naming the flag."""
    is_valid, options, error = OptionsValidator().validate(items)
    if not is_valid:
        raise validation_error(error, field)
    return options
