"""
==============================================================================
Ensemble CSV Module
==============================================================================

Long-format CSV codec for path ensembles.

Format:
-------
    path_id,t,x1,...,xd
    0,0.0,0.12,-0.4
    0,0.002,0.13,-0.41
    ...

Rows are sorted by (path_id, t). Every path must carry the same grid. Floats
are written with repr, so a written file reads back to identical arrays.

==============================================================================
"""

from __future__ import annotations

import csv
import logging
from pathlib import Path
from typing import Dict, List, TextIO, Union

import numpy as np

from nlica.core.exceptions import input_not_found, malformed_csv

from .paths import PathEnsemble


# Module logger
logger = logging.getLogger(__name__)

PathLike = Union[str, Path]


def dump_ensemble_csv(ensemble: PathEnsemble, handle: TextIO) -> None:
    """Write an ensemble in long format to an open text stream."""
    header = ["path_id", "t"] + [f"x{k}" for k in range(1, ensemble.d + 1)]
    times = [repr(float(t)) for t in ensemble.times]

    writer = csv.writer(handle, lineterminator="\n")
    writer.writerow(header)
    for path_id in range(ensemble.n_paths):
        values = ensemble.values[path_id]
        for index, t in enumerate(times):
            writer.writerow([path_id, t] + [repr(float(v)) for v in values[index]])


def write_ensemble_csv(ensemble: PathEnsemble, path: PathLike) -> Path:
    """
    Write an ensemble in long format.

    Args:
        ensemble: Ensemble to write
        path: Destination file (parent directories are created)

    Returns:
        The written path
    """
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)

    with path.open("w", newline="", encoding="utf-8") as handle:
        dump_ensemble_csv(ensemble, handle)

    logger.debug(f"Wrote {ensemble.n_paths} paths to {path}")
    return path


def read_ensemble_csv(path: PathLike, label: str = "") -> PathEnsemble:
    """
    Read a long-format ensemble CSV.

    Args:
        path: Source file
        label: Label attached to the ensemble

    Returns:
        PathEnsemble with paths ordered by path_id

    Raises:
        AppException: INPUT_NOT_FOUND, MALFORMED_CSV (with row/column)
    """
    path = Path(path)
    if not path.is_file():
        raise input_not_found(str(path))

    with path.open("r", newline="", encoding="utf-8") as handle:
        reader = csv.reader(handle)
        header = next(reader, None)
        if not header or len(header) < 3 or header[:2] != ["path_id", "t"]:
            raise malformed_csv("Header must start with path_id,t followed by x1..xd", row=1)
        d = len(header) - 2
        expected = [f"x{k}" for k in range(1, d + 1)]
        for name, wanted in zip(header[2:], expected):
            if name != wanted:
                raise malformed_csv(f"Expected column '{wanted}'", row=1, column=name)

        rows: Dict[int, List[List[float]]] = {}
        previous = (-1, -np.inf)
        for row_number, row in enumerate(reader, start=2):
            if not row:
                continue
            if len(row) != d + 2:
                raise malformed_csv(f"Expected {d + 2} fields, got {len(row)}", row=row_number)
            try:
                path_id = int(row[0])
            except ValueError:
                raise malformed_csv("path_id must be an integer", row=row_number, column="path_id")
            numbers = []
            for name, field in zip(header[1:], row[1:]):
                try:
                    numbers.append(float(field))
                except ValueError:
                    raise malformed_csv(f"Not a number: {field!r}", row=row_number, column=name)
            if (path_id, numbers[0]) <= previous:
                raise malformed_csv("Rows must be sorted by (path_id, t)", row=row_number, column="t")
            previous = (path_id, numbers[0])
            rows.setdefault(path_id, []).append(numbers)

    if not rows:
        raise malformed_csv("No data rows", row=2)

    ids = sorted(rows)
    if ids != list(range(len(ids))):
        raise malformed_csv("path_id values must be 0..N-1", column="path_id")

    blocks = [np.asarray(rows[i], dtype=float) for i in ids]
    times = blocks[0][:, 0]
    for path_id, block in zip(ids, blocks):
        if block.shape[0] != times.size or not np.array_equal(block[:, 0], times):
            raise malformed_csv(f"Path {path_id} does not share the grid of path 0", column="t")

    values = np.stack([block[:, 1:] for block in blocks])
    logger.debug(f"Read {len(ids)} paths of dimension {d} from {path}")
    return PathEnsemble(times, values, label=label or path.stem)
