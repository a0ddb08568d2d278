"""
==============================================================================
nlica - Application Entry Point
==============================================================================

Command-line application for nonlinear ICA of multivariate paths:
- simulate independent sources and mix them
- evaluate the signature-cumulant independence contrast
- separate mixtures by minimizing it over a candidate family
- score recoveries by monomial discordance
- run complete bundled experiments with reproducible manifests

Usage:
------
    python -m nlica simulate --model ou --d 2 --steps 500 --paths 128 --seed 42 -o s.csv
    python -m nlica --threads 4 experiment --name henon_ou

Exit codes: 0 success, 1 runtime failure, 2 validation failure. Errors are
reported on stderr as JSON; logs go to stderr, results to stdout or files.

==============================================================================
"""

from __future__ import annotations

import logging
import sys
from typing import List, Optional

from nlica.cli.router import MainCommandRouter
from nlica.config import get_settings
from nlica.core.exceptions import AppException, internal_error, report_exception


# Module logger
logger = logging.getLogger(__name__)


# ============================================================================
# APPLICATION
# ============================================================================

class Application:
    """
    Command-line application manager.

    Handles:
    - Argument parsing through the command router
    - Logging setup
    - Dispatch to the subcommand controller
    - Conversion of failures into exit codes
    """

    def __init__(self) -> None:
        """Initialize the application."""
        self._settings = get_settings()
        self._router = MainCommandRouter()

    def _configure_logging(self, debug: bool) -> None:
        logging.basicConfig(
            level=logging.DEBUG if debug or self._settings.debug else logging.INFO,
            format="%(asctime)s [%(levelname)s] %(name)s: %(message)s",
            stream=sys.stderr,
            force=True,
        )

    def run(self, argv: Optional[List[str]] = None) -> int:
        """
        Parse arguments, run the subcommand and return its exit code.

        Args:
            argv: Arguments without the program name (default: sys.argv[1:])

        Returns:
            0 on success, 1 on runtime failure, 2 on validation failure
        """
        try:
            args = self._router.parse(argv)
        except SystemExit as exc:
            # argparse exits 2 on usage errors and 0 for --help/--version
            return int(exc.code or 0)

        self._configure_logging(args.debug)
        controller = args.controller(threads=args.threads)
        logger.debug(f"Running {args.command} with {self._settings!r}")

        try:
            return controller.run(args)
        except AppException as exc:
            logger.error(f"❌ {exc.code}: {exc.message}")
            return report_exception(exc)
        except Exception as exc:
            logger.exception(f"❌ Unexpected failure in {args.command}")
            return report_exception(internal_error(f"{type(exc).__name__}: {exc}"))


def main(argv: Optional[List[str]] = None) -> int:
    """Console entry point."""
    return Application().run(argv)


if __name__ == "__main__":
    sys.exit(main())
