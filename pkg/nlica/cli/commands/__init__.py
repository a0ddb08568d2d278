"""
Subcommands of the nlica command line.

Each module defines a Controller and a register() hook adding its parser.
"""

from . import contrast, contrastivity, evaluate, experiment, mix, separate, simulate

COMMANDS = (simulate, mix, contrast, separate, evaluate, experiment, contrastivity)

__all__ = ["COMMANDS"]
