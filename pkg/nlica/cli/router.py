"""
==============================================================================
Main Command Router
==============================================================================

Combines every subcommand under one argparse parser.

Global flags precede the subcommand:
    nlica [--threads N] [--debug] <command> [options]

==============================================================================
"""

from __future__ import annotations

import argparse
from typing import List, Optional

from nlica import __version__

from .arguments import positive_int
from .commands import COMMANDS


class MainCommandRouter:
    """
    Main command router combining all subcommands.

    Provides a single entry point for all command-line operations.
    """

    def __init__(self) -> None:
        """Initialize the parser with all subcommands."""
        self._parser = argparse.ArgumentParser(
            prog="nlica",
            description="Nonlinear ICA of multivariate paths via signature cumulants",
        )
        self._add_global_arguments()
        self._include_commands()

    def _add_global_arguments(self) -> None:
        self._parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
        self._parser.add_argument("--threads", type=positive_int,
                                  help="Worker cap (results do not depend on it)")
        self._parser.add_argument("--debug", action="store_true", help="Verbose logging")

    def _include_commands(self) -> None:
        """Register every subcommand parser."""
        subparsers = self._parser.add_subparsers(dest="command", metavar="<command>")
        subparsers.required = True
        for command in COMMANDS:
            command.register(subparsers)

    @property
    def parser(self) -> argparse.ArgumentParser:
        """Get the argparse parser instance."""
        return self._parser

    def parse(self, argv: Optional[List[str]] = None) -> argparse.Namespace:
        return self._parser.parse_args(argv)
