"""
==============================================================================
Simulate Command
==============================================================================

nlica simulate --model ou --d 2 --steps 500 --paths 128 --seed 42 -o sources.csv

Writes an ensemble CSV of independent source paths, to stdout without -o.

==============================================================================
"""

from __future__ import annotations

import argparse
import logging
import sys
from typing import Optional

from nlica.core.exceptions import EXIT_OK
from nlica.signatures.ensemble_io import dump_ensemble_csv, write_ensemble_csv
from nlica.sources.simulators import simulate

from ..arguments import add_source_arguments, source_spec_from_args


# Module logger
logger = logging.getLogger(__name__)


class SimulateController:
    """Controller for source simulation."""

    def __init__(self, threads: Optional[int] = None) -> None:
        self._threads = threads

    def run(self, args: argparse.Namespace) -> int:
        spec = source_spec_from_args(args)
        ensemble = simulate(spec, threads=self._threads)
        if args.output:
            destination = write_ensemble_csv(ensemble, args.output)
        else:
            dump_ensemble_csv(ensemble, sys.stdout)
            destination = "stdout"
        logger.info(f"✅ Simulated {spec.n_paths} {spec.kind.value} paths (d={spec.d}) → {destination}")
        return EXIT_OK


def register(subparsers: argparse._SubParsersAction) -> None:
    parser = subparsers.add_parser("simulate", help="Simulate independent source paths")
    add_source_arguments(parser)
    parser.add_argument("-o", "--output", help="Destination ensemble CSV (default: stdout)")
    parser.set_defaults(controller=SimulateController)
