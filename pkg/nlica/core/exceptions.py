"""
Application Exception Handling

Single AppException class for all toolkit errors, with CLI exit-code mapping.
"""

from __future__ import annotations

import json
import sys
from datetime import datetime, timezone
from typing import Any, Dict, Optional, TextIO

from pydantic import ValidationError


# Exit codes
EXIT_OK = 0
EXIT_RUNTIME = 1
EXIT_VALIDATION = 2


class AppException(Exception):
    """
    Unified exception for all error scenarios.

    Provides a consistent error payload for the CLI and for library callers.

    Usage:
        raise AppException("mu exceeds depth", "MU_EXCEEDS_DEPTH", EXIT_VALIDATION)
        raise AppException("Map undefined", "DOMAIN_VIOLATION", details={"path": 3})

    Error Codes:
        Validation (exit 2):
            - VALIDATION_ERROR
            - MU_EXCEEDS_DEPTH
            - UNKNOWN_FAMILY
            - UNSUPPORTED_KIND
            - MALFORMED_CSV
            - INVALID_WEIGHTS
            - INVALID_WORD
            - DIMENSION_MISMATCH
            - DEGENERATE_PARAMETERS
            - INPUT_NOT_FOUND
            - CONFIG_NOT_FOUND
            - EXPERIMENT_NOT_FOUND

        Runtime (exit 1):
            - DEGENERATE_NORMALIZATION
            - DOMAIN_VIOLATION
            - NOT_POSITIVE_DEFINITE
            - SINGULAR_JACOBIAN
            - NON_FINITE_OBJECTIVE
            - DIVERGENCE
            - INTERNAL_ERROR
    """

    def __init__(
        self,
        message: str,
        code: str,
        exit_code: int = EXIT_RUNTIME,
        details: Optional[Dict[str, Any]] = None
    ):
        """
        Initialize application exception.

        Args:
            message: Human-readable error message
            code: Machine-readable error code (e.g., "DOMAIN_VIOLATION")
            exit_code: Process exit code used by the CLI (default: 1)
            details: Additional error context (optional)
        """
        self.message = message
        self.code = code
        self.exit_code = exit_code
        self.details = details or {}
        self.timestamp = datetime.now(timezone.utc).isoformat()
        super().__init__(self.message)

    def to_dict(self) -> Dict[str, Any]:
        """Convert exception to a JSON-ready dictionary."""
        error_dict: Dict[str, Any] = {
            "success": False,
            "error": {
                "code": self.code,
                "message": self.message,
                "timestamp": self.timestamp
            }
        }

        if self.details:
            error_dict["error"]["details"] = self.details

        return error_dict

    def with_stage(self, stage: str) -> "AppException":
        """Tag the exception with the pipeline stage it escaped from."""
        if "stage" not in self.details:
            self.details = {**self.details, "stage": stage}
            self.message = f"[{stage}] {self.message}"
            self.args = (self.message,)
        return self


def report_exception(exc: AppException, stream: Optional[TextIO] = None) -> int:
    """
    Write an AppException as JSON and return its exit code.

    Call this at the CLI boundary instead of letting the traceback escape.

    Args:
        exc: Raised application exception
        stream: Destination stream (default: stderr)

    Returns:
        The exit code carried by the exception
    """
    (stream or sys.stderr).write(json.dumps(exc.to_dict(), default=str) + "\n")
    return exc.exit_code


# ============================================
# CONVENIENCE FACTORY FUNCTIONS
# ============================================

def validation_error(message: str, field: Optional[str] = None) -> AppException:
    """Create a generic validation exception naming the offending field."""
    details = {"field": field} if field else {}
    text = f"{field}: {message}" if field else message
    return AppException(text, "VALIDATION_ERROR", EXIT_VALIDATION, details)


def from_validation_error(exc: ValidationError) -> AppException:
    """Convert a pydantic ValidationError into a VALIDATION_ERROR exception."""
    errors = exc.errors()
    first = errors[0] if errors else {"loc": (), "msg": str(exc)}
    field = ".".join(str(part) for part in first.get("loc", ())) or None
    message = str(first.get("msg", "invalid value")).removeprefix("Value error, ")
    error = validation_error(message, field)
    if len(errors) > 1:
        error.details["errors"] = [
            {"field": ".".join(str(p) for p in e.get("loc", ())), "message": e.get("msg")}
            for e in errors
        ]
    return error


def mu_exceeds_depth(mu: int, depth: int) -> AppException:
    """Create exception for a cross-word length beyond the truncation depth."""
    return AppException(
        f"mu exceeds depth (mu={mu}, depth={depth})",
        "MU_EXCEEDS_DEPTH",
        EXIT_VALIDATION,
        {"field": "mu", "mu": mu, "depth": depth}
    )


def constant_term_invalid(operation: str, expected: float, actual: float) -> AppException:
    """Create exception for a series whose empty-word coefficient is not the one required."""
    return AppException(
        f"{operation} requires an empty-word coefficient of {expected:g}",
        "VALIDATION_ERROR",
        EXIT_VALIDATION,
        {"field": "constant", "expected": expected, "value": actual}
    )


def dimension_mismatch(message: str, **details: Any) -> AppException:
    """Create exception for incompatible dimensions, depths or grids."""
    return AppException(message, "DIMENSION_MISMATCH", EXIT_VALIDATION, details)


def invalid_word(letters: Any, d: Optional[int] = None) -> AppException:
    """Create exception for a word with letters outside the alphabet."""
    details: Dict[str, Any] = {"letters": list(letters)}
    if d is not None:
        details["d"] = d
    return AppException("Word letters must lie in {1..d}", "INVALID_WORD", EXIT_VALIDATION, details)


def invalid_weights(message: str) -> AppException:
    """Create exception for probability weights that are not a distribution."""
    return AppException(message, "INVALID_WEIGHTS", EXIT_VALIDATION, {"field": "weights"})


def unknown_family(family: str) -> AppException:
    """Create exception for an unregistered map or copula family."""
    return AppException(
        f"Unknown family '{family}'",
        "UNKNOWN_FAMILY",
        EXIT_VALIDATION,
        {"field": "family", "family": family}
    )


def unsupported_kind(kind: str, operation: str) -> AppException:
    """Create exception for a source kind an operation does not cover."""
    return AppException(
        f"Source kind '{kind}' is not supported by {operation}",
        "UNSUPPORTED_KIND",
        EXIT_VALIDATION,
        {"field": "kind", "kind": kind}
    )


def degenerate_parameters(message: str, **details: Any) -> AppException:
    """Create exception for parameters outside a family's domain."""
    return AppException(message, "DEGENERATE_PARAMETERS", EXIT_VALIDATION, details)


def malformed_csv(message: str, row: Optional[int] = None, column: Optional[str] = None) -> AppException:
    """Create exception for an ensemble CSV that does not parse."""
    details: Dict[str, Any] = {}
    if row is not None:
        details["row"] = row
    if column is not None:
        details["column"] = column
    return AppException(message, "MALFORMED_CSV", EXIT_VALIDATION, details)


def input_not_found(path: str) -> AppException:
    """Create exception for a missing input file."""
    return AppException(f"Input file not found: {path}", "INPUT_NOT_FOUND", EXIT_VALIDATION, {"path": path})


def experiment_not_found(name: str) -> AppException:
    """Create exception for an unknown bundled experiment."""
    return AppException(
        f"Experiment '{name}' not found",
        "EXPERIMENT_NOT_FOUND",
        EXIT_VALIDATION,
        {"field": "name", "name": name}
    )


def degenerate_normalization(coordinate: int, value: float) -> AppException:
    """Create exception for a coordinate with vanishing increment variance."""
    return AppException(
        f"Diagonal cumulant of coordinate {coordinate} is degenerate ({value:.3e})",
        "DEGENERATE_NORMALIZATION",
        EXIT_RUNTIME,
        {"coordinate": coordinate, "value": value}
    )


def domain_violation(message: str, **details: Any) -> AppException:
    """Create exception for a map evaluated outside its domain."""
    return AppException(message, "DOMAIN_VIOLATION", EXIT_RUNTIME, details)


def not_positive_definite(kind: str, coordinate: int) -> AppException:
    """Create exception for a covariance that fails Cholesky after jitter."""
    return AppException(
        f"Covariance of {kind} coordinate {coordinate} is not positive definite",
        "NOT_POSITIVE_DEFINITE",
        EXIT_RUNTIME,
        {"kind": kind, "coordinate": coordinate}
    )


def singular_jacobian(point_index: int) -> AppException:
    """Create exception for a singular Jacobian at a grid point."""
    return AppException(
        f"Jacobian is singular at grid point {point_index}",
        "SINGULAR_JACOBIAN",
        EXIT_RUNTIME,
        {"point_index": point_index}
    )


def non_finite_objective(theta: Any) -> AppException:
    """Create exception for an objective that is not finite at the start point."""
    return AppException(
        "Objective is not finite at the initial parameters",
        "NON_FINITE_OBJECTIVE",
        EXIT_RUNTIME,
        {"theta": [float(v) for v in theta]}
    )


def divergence(value: float, iteration: int) -> AppException:
    """Create exception for an optimizer run that diverged."""
    return AppException(
        f"Optimizer diverged at iteration {iteration} (value {value:.3e})",
        "DIVERGENCE",
        EXIT_RUNTIME,
        {"value": value, "iteration": iteration}
    )


def internal_error(message: str = "Internal error") -> AppException:
    """Create generic internal error exception."""
    return AppException(message, "INTERNAL_ERROR", EXIT_RUNTIME)
