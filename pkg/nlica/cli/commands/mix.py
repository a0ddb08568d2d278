"""
==============================================================================
Mix Command
==============================================================================

nlica mix -i sources.csv --family henon --params 1.4,0.3 --option rotation=45 -o mixture.csv

Applies a registered map to every node of every path.

==============================================================================
"""

from __future__ import annotations

import argparse
import logging
from typing import Optional

from nlica.core.exceptions import EXIT_OK
from nlica.mixing.families import build_map
from nlica.mixing.maps import apply_map
from nlica.signatures.ensemble_io import read_ensemble_csv, write_ensemble_csv

from ..arguments import add_map_arguments, map_spec_from_args


# Module logger
logger = logging.getLogger(__name__)


class MixController:
    """Controller for applying a mixing map."""

    def __init__(self, threads: Optional[int] = None) -> None:
        self._threads = threads

    def run(self, args: argparse.Namespace) -> int:
        spec = map_spec_from_args(args)
        ensemble = read_ensemble_csv(args.input)
        m = build_map(spec, dim=ensemble.d)
        mixed = apply_map(m, ensemble, threads=self._threads)
        path = write_ensemble_csv(mixed, args.output)
        logger.info(f"✅ Applied {m.family} to {ensemble.n_paths} paths → {path}")
        return EXIT_OK


def register(subparsers: argparse._SubParsersAction) -> None:
    parser = subparsers.add_parser("mix", help="Apply a mixing map to an ensemble")
    parser.add_argument("-i", "--input", required=True, help="Input ensemble CSV")
    add_map_arguments(parser)
    parser.add_argument("-o", "--output", required=True, help="Destination ensemble CSV")
    parser.set_defaults(controller=MixController)
