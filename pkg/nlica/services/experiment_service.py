"""
==============================================================================
Experiment Service Module
==============================================================================

End-to-end separation experiment: one config, one seed, one artifact bundle.

This module implements:
- ExperimentService: runs the pipeline stage by stage and writes artifacts
- separate: optimizer dispatch shared with the `separate` command
- discordance_lattice: discordance of g_θ(X) against the sources at every
  lattice point of a grid search

Pipeline:
---------
    validate ─▶ simulate ─▶ mix ─▶ separate ─▶ evaluate ─▶ manifest

    validate   families resolve, candidate parameters initialised
    simulate   independent sources, scaled to unit amplitude
    mix        X = f(S)
    separate   minimize θ ↦ contrast(g_θ(X))
    evaluate   concordance and discordance of g_θ*(X) against S

Artifacts:
---------
sources.csv, mixture.csv, estimate.csv      ensemble CSVs
optimizer.json                              OptimizerReport
grid.csv, phi_grid.csv, delta_grid.csv      grid method only
concordance.json, concordance.csv           ConcordanceMatrix
metrics.json                                contrasts and discordance
manifest.json                               RunManifest

Failures escape with details["stage"] naming the stage that raised them.
A diverged stochastic descent still writes its report before failing.

==============================================================================
"""

from __future__ import annotations

import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np

from nlica.config import get_settings
from nlica.core.exceptions import AppException, divergence
from nlica.mixing.families import build_map, init_mlp_params
from nlica.mixing.maps import apply_map
from nlica.metrics.concordance import concordance_matrix, monomial_discordance
from nlica.optimization.objective import Objective
from nlica.optimization.optimizers import GridSearchResult, grid_search, nelder_mead, sgd_fd
from nlica.schemas.experiment import ExperimentConfig
from nlica.schemas.mixing import MapSpec
from nlica.schemas.optimizer import OptimizerConfig, OptimizerMethod
from nlica.schemas.results import (
    ConcordanceMatrix,
    ConcordanceMode,
    DiscordanceResult,
    OptimizerReport,
    RunManifest,
)
from nlica.signatures.contrast import contrast_ic
from nlica.signatures.ensemble_io import write_ensemble_csv
from nlica.signatures.paths import PathEnsemble, preprocess
from nlica.sources.simulators import simulate
from nlica.utils.io import write_csv, write_json
from nlica.utils.manifest import RunManifestWriter


# Module logger
logger = logging.getLogger(__name__)

# Discordance assigned to lattice points where g_θ(X) cannot be evaluated
UNDEFINED_DISCORDANCE = 1.0


# =============================================================================
# SHARED STEPS
# =============================================================================

def resolve_candidate(candidate: MapSpec, dim: int, seed: int) -> MapSpec:
    """
    Fill in the starting parameters of an MLP candidate given without any.

    Weights are drawn from the optimizer stream of the run seed; the option
    "init_scale" (default 1) scales their standard deviation.
    """
    if candidate.family != "mlp" or candidate.params:
        return candidate
    shape = candidate.options.get("shape", [dim, dim])
    scale = float(candidate.options.get("init_scale", 1.0))
    params = init_mlp_params(shape, seed, scale=scale)
    logger.info(f"Initialised MLP candidate {shape} with {len(params)} parameters")
    return candidate.model_copy(update={"params": params})


def separate(
    objective: Objective,
    optimizer: OptimizerConfig,
    seed: int,
    threads: Optional[int] = None,
) -> Tuple[OptimizerReport, Optional[GridSearchResult]]:
    """
    Run the configured optimizer on an objective.

    Args:
        objective: Separation objective
        optimizer: Method and options; theta0 defaults to the candidate's
            current free parameters
        seed: Run seed (subsampling stream of stochastic descent)
        threads: Worker cap

    Returns:
        (report, grid result or None)
    """
    if optimizer.method == OptimizerMethod.GRID:
        result = grid_search(objective, optimizer.grid, threads=threads)
        return result.report, result

    theta0 = optimizer.theta0 if optimizer.theta0 is not None else objective.family.free_values()
    if optimizer.method == OptimizerMethod.NELDER_MEAD:
        return nelder_mead(objective, theta0, optimizer.nelder_mead), None
    return sgd_fd(objective, theta0, optimizer.sgd, seed=seed, threads=threads), None


def _point_discordance(
    objective: Objective,
    sources: PathEnsemble,
    theta: Sequence[float],
    mode: Optional[ConcordanceMode],
) -> float:
    try:
        estimate = objective.estimate(theta)
    except AppException as exc:
        logger.debug(f"Discordance undefined at θ={list(theta)}: {exc.code}")
        return UNDEFINED_DISCORDANCE
    return monomial_discordance(concordance_matrix(sources, estimate, mode)).value


def discordance_lattice(
    objective: Objective,
    sources: PathEnsemble,
    grid: GridSearchResult,
    mode: Optional[ConcordanceMode] = None,
    threads: Optional[int] = None,
) -> np.ndarray:
    """
    Discordance of g_θ(X) against the sources at every lattice point.

    Returns:
        Array shaped like grid.values; points where the candidate is
        undefined on the data score 1
    """
    threads = threads or get_settings().threads
    points = grid.points
    if threads <= 1:
        values = [_point_discordance(objective, sources, p, mode) for p in points]
    else:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            values = list(pool.map(lambda p: _point_discordance(objective, sources, p, mode), points))
    return np.array(values).reshape(grid.values.shape)


# =============================================================================
# EXPERIMENT SERVICE
# =============================================================================

@dataclass
class ExperimentOutcome:
    """Everything a finished run produced."""
    directory: Path
    manifest: RunManifest
    report: OptimizerReport
    concordance: ConcordanceMatrix
    discordance: DiscordanceResult
    metrics: Dict[str, object]
    grid: Optional[GridSearchResult] = None
    delta: Optional[np.ndarray] = None
    artifacts: Dict[str, Path] = field(default_factory=dict)


class ExperimentService:
    """
    Runs one experiment config and writes its artifact bundle.

    Attributes:
        _config: Validated experiment config
        _directory: Output directory of the run
        _threads: Worker cap passed to every stage

    Example:
        >>> service = ExperimentService(get_catalog().get("henon_ou"))
        >>> outcome = service.run()
        >>> outcome.discordance.value < 0.2
        True
    """

    def __init__(
        self,
        config: ExperimentConfig,
        output_directory: Optional[Path] = None,
        threads: Optional[int] = None,
    ) -> None:
        """
        Initialize the experiment service.

        Args:
            config: Validated experiment config
            output_directory: Run directory (default: config.output_directory
                or <settings.output_directory>/<config.name>)
            threads: Worker cap (uses settings if None)
        """
        settings = get_settings()
        self._config = config
        if output_directory is not None:
            self._directory = Path(output_directory)
        elif config.output_directory:
            self._directory = Path(config.output_directory)
        else:
            self._directory = settings.output_path / config.name
        self._threads = threads or settings.threads
        self._writer = RunManifestWriter(self._directory)

    @property
    def directory(self) -> Path:
        return self._directory

    # =========================================================================
    # ARTIFACTS
    # =========================================================================

    def _artifact(self, key: str, filename: str) -> Path:
        path = self._directory / filename
        self._writer.add_artifact(key, path)
        return path

    def _write_grid(self, grid: GridSearchResult, delta: Optional[np.ndarray]) -> None:
        n_axes = len(grid.axes)
        thetas = [f"theta{i + 1}" for i in range(n_axes)]
        points = grid.points
        phi = grid.values.ravel()

        write_csv(thetas + ["phi"], ([*map(float, p), float(v)] for p, v in zip(points, phi)),
                  self._artifact("phi_grid", "phi_grid.csv"))
        if delta is None:
            write_csv(thetas + ["contrast"], ([*map(float, p), float(v)] for p, v in zip(points, phi)),
                      self._artifact("grid", "grid.csv"))
            return

        deltas = delta.ravel()
        write_csv(thetas + ["delta"], ([*map(float, p), float(v)] for p, v in zip(points, deltas)),
                  self._artifact("delta_grid", "delta_grid.csv"))
        write_csv(
            thetas + ["contrast", "discordance"],
            ([*map(float, p), float(v), float(w)] for p, v, w in zip(points, phi, deltas)),
            self._artifact("grid", "grid.csv"),
        )

    def _write_concordance(self, concordance: ConcordanceMatrix) -> None:
        write_json(concordance, self._artifact("concordance", "concordance.json"))
        d = concordance.d
        rows = ([f"s{i + 1}", *map(float, row)] for i, row in enumerate(concordance.entries))
        write_csv(["source"] + [f"y{j + 1}" for j in range(d)], rows,
                  self._artifact("concordance_csv", "concordance.csv"))

    # =========================================================================
    # PIPELINE
    # =========================================================================

    def run(self) -> ExperimentOutcome:
        """
        Execute every stage and write the artifact bundle.

        Returns:
            ExperimentOutcome with the manifest and the headline results

        Raises:
            AppException: the failing stage's error with details["stage"];
                DIVERGENCE after the report of a diverged descent is written
        """
        config = self._config
        writer = self._writer
        threads = self._threads
        d = config.source.d
        logger.info(f"🚀 Experiment {config.name} (seed {config.seed}) → {self._directory}")

        with writer.stage("validate"):
            mixer = build_map(config.mixing, dim=d)
            candidate = resolve_candidate(config.candidate, d, config.seed)
            build_map(candidate, dim=d)
            self._directory.mkdir(parents=True, exist_ok=True)

        with writer.stage("simulate"):
            sources = simulate(config.source, threads=threads)
            if config.scale_sources:
                sources = preprocess(sources, center=True, scale=True)
            write_ensemble_csv(sources, self._artifact("sources", "sources.csv"))

        with writer.stage("mix"):
            mixture = apply_map(mixer, sources, threads=threads, label="mixture")
            write_ensemble_csv(mixture, self._artifact("mixture", "mixture.csv"))

        with writer.stage("separate"):
            objective = Objective(
                mixture, candidate, config.depth, config.mu,
                center=config.center, scale=config.scale,
            )
            report, grid = separate(objective, config.optimizer, config.seed, threads=threads)
            write_json(report, self._artifact("optimizer", "optimizer.json"))
            if report.status == "diverged":
                last = report.trajectory[-1]
                raise divergence(last.value, last.iteration)

        with writer.stage("evaluate"):
            estimate = objective.estimate(report.best_theta)
            write_ensemble_csv(estimate, self._artifact("estimate", "estimate.csv"))

            concordance = concordance_matrix(sources, estimate, config.evaluation.mode)
            discordance = monomial_discordance(concordance)
            self._write_concordance(concordance)

            delta = None
            if grid is not None:
                if config.evaluation.discordance_grid:
                    delta = discordance_lattice(
                        objective, sources, grid, config.evaluation.mode, threads=threads
                    )
                self._write_grid(grid, delta)

            metrics = {
                "best_theta": report.best_theta,
                "best_value": report.best_value,
                "contrast_sources": contrast_ic(sources, config.depth, config.mu, threads=threads).contrast,
                "contrast_mixture": contrast_ic(mixture, config.depth, config.mu, threads=threads).contrast,
                "discordance": discordance.value,
                "permutation": discordance.permutation,
                "concordance_mode": concordance.mode.value,
                "null_threshold": get_settings().null_threshold,
                "status": report.status,
            }
            write_json(metrics, self._artifact("metrics", "metrics.json"))

        manifest = writer.write(config.name, config, config.seed)
        logger.info(
            f"✅ Experiment {config.name}: contrast {report.best_value:.4g}, "
            f"discordance {discordance.value:.4f}"
        )
        return ExperimentOutcome(
            directory=self._directory,
            manifest=manifest,
            report=report,
            concordance=concordance,
            discordance=discordance,
            metrics=metrics,
            grid=grid,
            delta=delta,
            artifacts={key: self._directory / path for key, path in manifest.artifact_paths.items()},
        )
