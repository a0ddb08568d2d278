"""
==============================================================================
Experiment Command
==============================================================================

nlica experiment --list
nlica experiment --name henon_ou [--output-dir runs/henon_ou]
nlica experiment --config my_experiment.json

Runs a complete simulate → mix → separate → evaluate pipeline from a
bundled or user-provided config and writes the artifact bundle with its
manifest.

==============================================================================
"""

from __future__ import annotations

import argparse
import logging
import sys
from pathlib import Path
from typing import Optional

from nlica.catalog.catalog import get_catalog, load_experiment_config
from nlica.config import get_settings
from nlica.core.exceptions import EXIT_OK, validation_error
from nlica.services.experiment_service import ExperimentService

from ..arguments import emit_json


# Module logger
logger = logging.getLogger(__name__)


class ExperimentController:
    """Controller for bundled and user experiments."""

    def __init__(self, threads: Optional[int] = None) -> None:
        self._threads = threads

    def list_experiments(self) -> int:
        for name, description in get_catalog().describe():
            sys.stdout.write(f"{name}\t{description}\n")
        return EXIT_OK

    def run(self, args: argparse.Namespace) -> int:
        if args.list:
            return self.list_experiments()
        if bool(args.name) == bool(args.config):
            raise validation_error("give exactly one of --name, --config or --list", "name")

        config = get_catalog().get(args.name) if args.name else load_experiment_config(args.config)
        get_settings().ensure_directories()
        service = ExperimentService(
            config,
            output_directory=Path(args.output_dir) if args.output_dir else None,
            threads=self._threads,
        )
        outcome = service.run()
        emit_json(
            {
                "directory": outcome.directory.as_posix(),
                "manifest_hash": outcome.manifest.manifest_hash,
                "discordance": outcome.discordance.value,
                "best_value": outcome.report.best_value,
            },
            None,
        )
        return EXIT_OK


def register(subparsers: argparse._SubParsersAction) -> None:
    parser = subparsers.add_parser("experiment", help="Run a complete separation experiment")
    parser.add_argument("--list", action="store_true", help="List bundled experiments")
    parser.add_argument("--name", help="Bundled experiment name")
    parser.add_argument("--config", help="Experiment config JSON")
    parser.add_argument("--output-dir", help="Run directory (default: from config or settings)")
    parser.set_defaults(controller=ExperimentController)
