"""
==============================================================================
Shared Command Arguments Module
==============================================================================

Flag groups used by several subcommands and their conversion into
validated schema objects.

This module implements:
- add_source_arguments / source_spec_from_args: SourceSpec flags
- add_map_arguments / map_spec_from_args: MapSpec flags
- add_depth_arguments: signature depth and cross-word length
- validated: pydantic validation with VALIDATION_ERROR conversion
- emit_json: JSON payload to a file or stdout

Required source parameters that are not given on the command line get
per-coordinate values that make the coordinates distinguishable (for
example OU rates 1, 2, ..., d), so `simulate --model ou --d 2` works
without further flags.

==============================================================================
"""

from __future__ import annotations

import argparse
import logging
import sys
from typing import Any, Callable, Dict, List, Optional, Type, TypeVar

import numpy as np
from pydantic import BaseModel, ValidationError

from nlica.config import get_settings
from nlica.core.exceptions import from_validation_error, mu_exceeds_depth, validation_error
from nlica.schemas.mixing import MapSpec
from nlica.schemas.source import PARAMETER_DEFAULTS, SourceKind, SourceSpec
from nlica.utils.io import dumps, read_json, write_json
from nlica.utils.validators import parse_floats, parse_options, parse_params


# Module logger
logger = logging.getLogger(__name__)

Model = TypeVar("Model", bound=BaseModel)

# Values for required parameters missing from the flags, per coordinate k
FLAG_DEFAULTS: Dict[SourceKind, Dict[str, Callable[[int], List[float]]]] = {
    SourceKind.OU: {
        "theta": lambda d: [1.0 + k for k in range(d)],
        "sigma": lambda d: [1.0] * d,
    },
    SourceKind.GP_GAMMA_EXP: {
        "gamma": lambda d: [1.0 + k for k in range(d)],
        "alpha": lambda d: [1.0] * d,
    },
    SourceKind.FBM: {
        "hurst": lambda d: np.linspace(0.3, 0.7, d).tolist() if d > 1 else [0.5],
    },
    SourceKind.GBM: {
        "s0": lambda d: [1.0] * d,
        "sigma": lambda d: [0.2 + 0.1 * k for k in range(d)],
    },
    SourceKind.COPULA_MARKOV: {
        "theta": lambda d: [2.0] * d,
    },
}


def validated(model: Type[Model], data: Any) -> Model:
    """Validate data against a schema, raising VALIDATION_ERROR on failure."""
    try:
        return model.model_validate(data)
    except ValidationError as e:
        raise from_validation_error(e) from e


def positive_int(text: str) -> int:
    try:
        value = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"'{text}' is not an integer")
    if value < 1:
        raise argparse.ArgumentTypeError("must be at least 1")
    return value


# =============================================================================
# SOURCE FLAGS
# =============================================================================

def add_source_arguments(parser: argparse.ArgumentParser) -> None:
    group = parser.add_argument_group("source")
    group.add_argument("--config", help="SourceSpec JSON file (overrides the flags below)")
    group.add_argument("--model", choices=[k.value for k in SourceKind], help="Source kind")
    group.add_argument("--d", type=int, default=2, help="Number of coordinates (default: 2)")
    group.add_argument("--steps", type=int, default=500, help="Time steps per path (default: 500)")
    group.add_argument("--paths", type=int, default=128, help="Number of paths (default: 128)")
    group.add_argument("--horizon", type=float, default=1.0, help="Final time (default: 1)")
    group.add_argument("--seed", type=int, help="Run seed (required without --config)")
    group.add_argument("--param", action="append", default=[], metavar="NAME=V1,V2",
                       help="Per-coordinate parameter values (repeatable)")
    group.add_argument("--copula", help="Copula family for copula_markov")
    group.add_argument("--fixed-start", action="store_true",
                       help="Start OU paths at the fixed value given by --param a=... (default 0) "
                            "instead of drawing the start from the stationary law")


def source_spec_from_args(args: argparse.Namespace) -> SourceSpec:
    """
    SourceSpec from --config or from the individual flags.

    Raises:
        AppException: VALIDATION_ERROR naming the offending flag or field
    """
    if args.config:
        return validated(SourceSpec, read_json(args.config))
    if not args.model:
        raise validation_error("--model or --config is required", "model")
    if args.seed is None:
        raise validation_error("--seed is required", "seed")

    kind = SourceKind(args.model)
    params = parse_params(args.param, "param")
    for name, fill in FLAG_DEFAULTS.get(kind, {}).items():
        if name not in params and PARAMETER_DEFAULTS[kind][name] is None:
            params[name] = fill(args.d)

    data: Dict[str, Any] = {
        "kind": kind,
        "d": args.d,
        "n_paths": args.paths,
        "n_steps": args.steps,
        "horizon": args.horizon,
        "seed": args.seed,
        "params": params,
        "stationary_start": not args.fixed_start,
    }
    if kind == SourceKind.COPULA_MARKOV:
        data["copula_family"] = args.copula or "clayton"
    elif args.copula:
        raise validation_error("only copula_markov takes a copula family", "copula")
    return validated(SourceSpec, data)


# =============================================================================
# MAP FLAGS
# =============================================================================

def add_map_arguments(parser: argparse.ArgumentParser, title: str = "map") -> None:
    group = parser.add_argument_group(title)
    group.add_argument("--map", dest="map_file", help="MapSpec JSON file (overrides the flags below)")
    group.add_argument("--family", help="Registered map family")
    group.add_argument("--params", default="", help="Comma-separated parameter vector")
    group.add_argument("--option", action="append", default=[], metavar="NAME=VALUE",
                       help="Family option (repeatable), e.g. rotation=45")
    group.add_argument("--inverse", action="store_true", help="Use the family's analytic inverse")
    group.add_argument("--free", help="Comma-separated indices of the optimized parameters")


def map_spec_from_args(args: argparse.Namespace) -> MapSpec:
    """
    MapSpec from --map or from the individual flags.

    Raises:
        AppException: VALIDATION_ERROR naming the offending flag or field
    """
    if args.map_file:
        return validated(MapSpec, read_json(args.map_file))
    if not args.family:
        raise validation_error("--family or --map is required", "family")

    data: Dict[str, Any] = {
        "family": args.family,
        "params": parse_floats(args.params, "params") if args.params.strip() else [],
        "options": parse_options(args.option, "option"),
        "inverse": args.inverse,
    }
    if getattr(args, "free", None):
        data["free"] = [int(v) for v in parse_floats(args.free, "free")]
    return validated(MapSpec, data)


# =============================================================================
# SIGNATURE FLAGS
# =============================================================================

def add_depth_arguments(parser: argparse.ArgumentParser) -> None:
    settings = get_settings()
    group = parser.add_argument_group("contrast")
    group.add_argument("--depth", type=int, default=settings.default_depth,
                       help=f"Signature depth M (default: {settings.default_depth})")
    group.add_argument("--mu", type=int, default=settings.default_mu,
                       help=f"Maximal cross-word length (default: {settings.default_mu})")
    group.add_argument("--no-center", dest="center", action="store_false",
                       help="Do not center coordinates")
    group.add_argument("--no-scale", dest="scale", action="store_false",
                       help="Do not scale coordinates to unit amplitude")


def check_depth(args: argparse.Namespace) -> None:
    """Validate --depth/--mu before any work is done."""
    if args.depth < 1:
        raise validation_error("must be at least 1", "depth")
    if args.mu < 2:
        raise validation_error("must be at least 2", "mu")
    if args.mu > args.depth:
        raise mu_exceeds_depth(args.mu, args.depth)


# =============================================================================
# OUTPUT
# =============================================================================

def emit_json(payload: Any, output: Optional[str] = None) -> None:
    """Write canonical JSON to a file, or to stdout when no file is given."""
    if output:
        write_json(payload, output)
        logger.info(f"✅ Wrote {output}")
    else:
        sys.stdout.write(dumps(payload))
