"""
==============================================================================
Contrast Command
==============================================================================

nlica contrast -i mixture.csv --depth 5 --mu 5 [-o contrast.json]

Writes the independence contrast with its per-word terms as JSON.

==============================================================================
"""

from __future__ import annotations

import argparse
import logging
from typing import Optional

from nlica.config import get_settings
from nlica.core.exceptions import EXIT_OK
from nlica.signatures.contrast import contrast_ic
from nlica.signatures.ensemble_io import read_ensemble_csv

from ..arguments import add_depth_arguments, check_depth, emit_json


# Module logger
logger = logging.getLogger(__name__)


class ContrastController:
    """Controller for contrast evaluation."""

    def __init__(self, threads: Optional[int] = None) -> None:
        self._threads = threads

    def run(self, args: argparse.Namespace) -> int:
        check_depth(args)
        ensemble = read_ensemble_csv(args.input)
        result = contrast_ic(
            ensemble, args.depth, args.mu,
            center=args.center, scale=args.scale, threads=self._threads,
        )
        threshold = get_settings().null_threshold
        verdict = "below" if result.contrast < threshold else "above"
        logger.info(f"✅ Contrast {result.contrast:.6g} ({verdict} null threshold {threshold})")
        emit_json(result, args.output)
        return EXIT_OK


def register(subparsers: argparse._SubParsersAction) -> None:
    parser = subparsers.add_parser("contrast", help="Independence contrast of an ensemble")
    parser.add_argument("-i", "--input", required=True, help="Input ensemble CSV")
    add_depth_arguments(parser)
    parser.add_argument("-o", "--output", help="Destination JSON (default: stdout)")
    parser.set_defaults(controller=ContrastController)
