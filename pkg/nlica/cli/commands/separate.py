"""
==============================================================================
Separate Command
==============================================================================

nlica separate -i mixture.csv --family henon --params 1.4,0.3 --inverse \
    --option rotation=45 --method grid --axis 0.9:1.9:21 --axis 0.1:0.5:21 \
    -o report.json --grid-output grid.csv [--true sources.csv]

Minimizes the contrast of g_θ(X) over a candidate family and writes the
optimizer report. Grid runs can also write the value lattice, and with
--true the discordance of every lattice point against known sources.

==============================================================================
"""

from __future__ import annotations

import argparse
import logging
from typing import Any, Dict, Optional

from nlica.core.exceptions import EXIT_OK, divergence, validation_error
from nlica.optimization.objective import Objective
from nlica.schemas.optimizer import OptimizerConfig, OptimizerMethod
from nlica.services.experiment_service import discordance_lattice, resolve_candidate, separate
from nlica.signatures.ensemble_io import read_ensemble_csv, write_ensemble_csv
from nlica.utils.io import read_json, write_csv
from nlica.utils.validators import parse_floats

from ..arguments import (
    add_depth_arguments,
    add_map_arguments,
    check_depth,
    emit_json,
    map_spec_from_args,
    validated,
)


# Module logger
logger = logging.getLogger(__name__)


def optimizer_config_from_args(args: argparse.Namespace) -> OptimizerConfig:
    """OptimizerConfig from --optimizer-config or from the individual flags."""
    if args.optimizer_config:
        return validated(OptimizerConfig, read_json(args.optimizer_config))

    data: Dict[str, Any] = {"method": args.method}
    if args.theta0:
        data["theta0"] = parse_floats(args.theta0, "theta0")
    if args.axis:
        data["grid"] = {"axes": args.axis}

    simplex = {"max_evals": args.max_evals, "xatol": args.xatol, "initial_step": args.initial_step}
    data["nelder_mead"] = {k: v for k, v in simplex.items() if v is not None}
    adam = {
        "lr": args.lr,
        "iterations": args.iterations,
        "batch_paths": args.batch_paths,
        "fd_step": args.fd_step,
        "l2": args.l2,
    }
    data["sgd"] = {k: v for k, v in adam.items() if v is not None}
    return validated(OptimizerConfig, data)


class SeparateController:
    """Controller for contrast minimization over a candidate family."""

    def __init__(self, threads: Optional[int] = None) -> None:
        self._threads = threads

    def run(self, args: argparse.Namespace) -> int:
        check_depth(args)
        optimizer = optimizer_config_from_args(args)
        mixture = read_ensemble_csv(args.input)
        candidate = resolve_candidate(map_spec_from_args(args), mixture.d, args.seed)

        n_free = len(candidate.free_indices)
        if optimizer.method == OptimizerMethod.GRID and len(optimizer.grid.axes) != n_free:
            raise validation_error(f"needs one axis per free parameter ({n_free})", "axis")

        objective = Objective(
            mixture, candidate, args.depth, args.mu, center=args.center, scale=args.scale,
        )
        report, grid = separate(objective, optimizer, args.seed, threads=self._threads)
        emit_json(report, args.output)
        if report.status == "diverged":
            last = report.trajectory[-1]
            raise divergence(last.value, last.iteration)

        if grid is not None and args.grid_output:
            self._write_grid(objective, grid, args)
        if args.estimate_output:
            write_ensemble_csv(objective.estimate(report.best_theta), args.estimate_output)
        return EXIT_OK

    def _write_grid(self, objective: Objective, grid, args: argparse.Namespace) -> None:
        thetas = [f"theta{i + 1}" for i in range(len(grid.axes))]
        points = grid.points
        phi = grid.values.ravel()
        if args.true:
            sources = read_ensemble_csv(args.true)
            delta = discordance_lattice(objective, sources, grid, threads=self._threads).ravel()
            rows = ([*map(float, p), float(v), float(w)] for p, v, w in zip(points, phi, delta))
            write_csv(thetas + ["contrast", "discordance"], rows, args.grid_output)
        else:
            rows = ([*map(float, p), float(v)] for p, v in zip(points, phi))
            write_csv(thetas + ["contrast"], rows, args.grid_output)
        logger.info(f"✅ Wrote {len(points)} lattice points to {args.grid_output}")


def register(subparsers: argparse._SubParsersAction) -> None:
    parser = subparsers.add_parser("separate", help="Minimize the contrast over a candidate family")
    parser.add_argument("-i", "--input", required=True, help="Mixture ensemble CSV")
    add_map_arguments(parser, "candidate")
    add_depth_arguments(parser)

    group = parser.add_argument_group("optimizer")
    group.add_argument("--optimizer-config", help="OptimizerConfig JSON (overrides the flags below)")
    group.add_argument("--method", choices=[m.value for m in OptimizerMethod], default="nelder_mead")
    group.add_argument("--theta0", help="Comma-separated start point (default: candidate parameters)")
    group.add_argument("--axis", action="append", default=[], metavar="START:STOP:COUNT",
                       help="Lattice axis per free parameter (grid method)")
    group.add_argument("--max-evals", type=int, help="Nelder-Mead evaluation budget")
    group.add_argument("--xatol", type=float, help="Nelder-Mead simplex-size tolerance")
    group.add_argument("--initial-step", type=float, help="Nelder-Mead initial simplex step")
    group.add_argument("--lr", type=float, help="Adam learning rate")
    group.add_argument("--iterations", type=int, help="Adam iterations")
    group.add_argument("--batch-paths", type=int, help="Paths per gradient estimate")
    group.add_argument("--fd-step", type=float, help="Relative finite-difference step")
    group.add_argument("--l2", type=float, help="l2 penalty weight")
    group.add_argument("--seed", type=int, default=0, help="Seed of the subsampling stream (default: 0)")

    parser.add_argument("-o", "--output", help="Optimizer report JSON (default: stdout)")
    parser.add_argument("--grid-output", help="Lattice values CSV (grid method)")
    parser.add_argument("--true", help="Source ensemble CSV for lattice discordance")
    parser.add_argument("--estimate-output", help="Write g_θ*(X) as an ensemble CSV")
    parser.set_defaults(controller=SeparateController)
