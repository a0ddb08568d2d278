"""
==============================================================================
Artifact I/O Module
==============================================================================

Deterministic JSON and CSV writers for run artifacts.

Every writer produces the same bytes for the same payload: JSON keys are
sorted, floats are written with repr (shortest round-trip form) and lines
end with "\\n" on every platform.

==============================================================================
"""

from __future__ import annotations

import csv
import json
import logging
from pathlib import Path
from typing import Any, Iterable, Sequence, Union

from pydantic import BaseModel

from nlica.core.exceptions import input_not_found, validation_error


# Module logger
logger = logging.getLogger(__name__)

PathLike = Union[str, Path]


def to_jsonable(payload: Any) -> Any:
    """Plain JSON structure for models, mappings and sequences."""
    if isinstance(payload, BaseModel):
        return payload.model_dump(mode="json")
    if isinstance(payload, dict):
        return {str(k): to_jsonable(v) for k, v in payload.items()}
    if isinstance(payload, (list, tuple)):
        return [to_jsonable(v) for v in payload]
    return payload


def dumps(payload: Any) -> str:
    """Canonical JSON text (sorted keys, two-space indent, trailing newline)."""
    return json.dumps(to_jsonable(payload), sort_keys=True, indent=2) + "\n"


def write_json(payload: Any, path: PathLike) -> Path:
    """
    Write a payload as canonical JSON.

    Args:
        payload: pydantic model, dict or list
        path: Destination file; parent directories are created

    Returns:
        The written path
    """
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open("w", encoding="utf-8", newline="\n") as f:
        f.write(dumps(payload))
    logger.debug(f"Wrote {path}")
    return path


def read_json(path: PathLike) -> Any:
    """
    Read a JSON file.

    Raises:
        AppException: INPUT_NOT_FOUND, VALIDATION_ERROR for invalid JSON
    """
    path = Path(path)
    if not path.is_file():
        raise input_not_found(str(path))
    try:
        with path.open("r", encoding="utf-8") as f:
            return json.load(f)
    except json.JSONDecodeError as e:
        raise validation_error(f"invalid JSON in {path.name}: {e.msg} (line {e.lineno})", "config") from e


def write_csv(header: Sequence[str], rows: Iterable[Sequence[Any]], path: PathLike) -> Path:
    """
    Write a table with a header row; floats are written with repr.

    Returns:
        The written path
    """
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open("w", encoding="utf-8", newline="") as f:
        writer = csv.writer(f, lineterminator="\n")
        writer.writerow(header)
        for row in rows:
            writer.writerow([repr(float(v)) if isinstance(v, float) else v for v in row])
    logger.debug(f"Wrote {path}")
    return path
