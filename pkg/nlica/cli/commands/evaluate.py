"""
==============================================================================
Evaluate Command
==============================================================================

nlica evaluate --true sources.csv --estimate estimate.csv [--mode ensemble] [-o metrics.json]

Scores an estimate against the true sources: concordance matrix, monomial
discordance and the matching permutation.

==============================================================================
"""

from __future__ import annotations

import argparse
import logging
from typing import Optional

from nlica.core.exceptions import EXIT_OK
from nlica.metrics.concordance import concordance_matrix, monomial_discordance
from nlica.schemas.results import ConcordanceMode
from nlica.signatures.ensemble_io import read_ensemble_csv
from nlica.utils.io import write_csv

from ..arguments import emit_json


# Module logger
logger = logging.getLogger(__name__)


class EvaluateController:
    """Controller for recovery scoring."""

    def __init__(self, threads: Optional[int] = None) -> None:
        self._threads = threads

    def run(self, args: argparse.Namespace) -> int:
        sources = read_ensemble_csv(args.true)
        estimate = read_ensemble_csv(args.estimate)
        concordance = concordance_matrix(sources, estimate, args.mode)
        discordance = monomial_discordance(concordance)

        logger.info(f"✅ Discordance {discordance.value:.4f} with permutation {discordance.permutation}")
        emit_json(
            {
                "concordance": concordance,
                "discordance": discordance.value,
                "permutation": discordance.permutation,
            },
            args.output,
        )
        if args.concordance_csv:
            rows = ([f"s{i + 1}", *map(float, row)] for i, row in enumerate(concordance.entries))
            header = ["source"] + [f"y{j + 1}" for j in range(concordance.d)]
            write_csv(header, rows, args.concordance_csv)
        return EXIT_OK


def register(subparsers: argparse._SubParsersAction) -> None:
    parser = subparsers.add_parser("evaluate", help="Score an estimate against the true sources")
    parser.add_argument("--true", required=True, help="Source ensemble CSV")
    parser.add_argument("--estimate", required=True, help="Estimate ensemble CSV")
    parser.add_argument("--mode", choices=[m.value for m in ConcordanceMode],
                        help="Pairing of Kendall's tau (default: ensemble when N >= 2)")
    parser.add_argument("-o", "--output", help="Metrics JSON (default: stdout)")
    parser.add_argument("--concordance-csv", help="Also write the concordance matrix as CSV")
    parser.set_defaults(controller=EvaluateController)
