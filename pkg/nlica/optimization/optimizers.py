"""
==============================================================================
Separation Optimizers Module
==============================================================================

Minimizers of the separation objective.

This module implements:
- grid_search: exhaustive lattice evaluation (first argmin in lattice order)
- nelder_mead: scipy's simplex search (reflection 1, expansion 2,
  contraction 0.5, shrink 0.5), stopping on simplex size or evaluations
- sgd_fd: Adam on central finite-difference gradients computed on random
  path subsamples, with an ℓ2 penalty

Independent evaluations (lattice points, finite-difference probes) run on a
thread pool; results are gathered in submission order, so reports do not
depend on the worker count.

==============================================================================
"""

from __future__ import annotations

import itertools
import logging
import math
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import List, Optional, Protocol, Sequence

import numpy as np
from scipy import optimize

from nlica.config import get_settings
from nlica.core.exceptions import non_finite_objective, validation_error
from nlica.schemas.optimizer import GridOptions, NelderMeadOptions, SGDOptions
from nlica.schemas.results import OptimizerReport, TrajectoryPoint
from nlica.sources.rng import Stream, stream_rng

from .objective import ObjectiveValue


# Module logger
logger = logging.getLogger(__name__)

# Nelder-Mead is meant for explicit low-dimensional families
MAX_SIMPLEX_PARAMS = 20


class SupportsObjective(Protocol):
    n_paths: int

    def evaluate(self, theta: Sequence[float]) -> ObjectiveValue: ...

    def restricted(self, indices: Sequence[int]) -> "SupportsObjective": ...


class _Recorder:
    """Collects every evaluation in call order."""

    def __init__(self) -> None:
        self.thetas: List[np.ndarray] = []
        self.values: List[float] = []
        self.penalized = 0

    def add(self, theta: np.ndarray, result: ObjectiveValue) -> float:
        self.thetas.append(np.array(theta, dtype=float))
        self.values.append(result.value)
        self.penalized += int(result.penalized)
        return result.value

    def best(self) -> int:
        values = np.array(self.values)
        finite = np.isfinite(values)
        if not np.any(finite):
            return 0
        return int(np.argmin(np.where(finite, values, np.inf)))

    def trajectory(self) -> List[TrajectoryPoint]:
        return [TrajectoryPoint(iteration=i, value=v) for i, v in enumerate(self.values)]


def _evaluate_many(
    objective: SupportsObjective,
    thetas: Sequence[np.ndarray],
    threads: int,
) -> List[ObjectiveValue]:
    if threads <= 1 or len(thetas) <= 1:
        return [objective.evaluate(theta) for theta in thetas]
    with ThreadPoolExecutor(max_workers=threads) as pool:
        return list(pool.map(objective.evaluate, thetas))


# =============================================================================
# GRID SEARCH
# =============================================================================

@dataclass(frozen=True)
class GridSearchResult:
    """Optimizer report plus the full value lattice."""
    report: OptimizerReport
    axes: List[np.ndarray]
    values: np.ndarray

    @property
    def points(self) -> List[tuple]:
        return list(itertools.product(*self.axes))


def grid_search(
    objective: SupportsObjective,
    options: GridOptions,
    threads: Optional[int] = None,
) -> GridSearchResult:
    """
    Evaluate every lattice point.

    Args:
        objective: Objective to minimize
        options: One axis per free parameter
        threads: Worker cap (uses settings if None)

    Returns:
        GridSearchResult whose values array has one dimension per axis

    Example:
        >>> result = grid_search(objective, GridOptions(axes=["0.9:1.9:21", "0.1:0.5:21"]))
        >>> result.values.shape
        (21, 21)
    """
    threads = threads or get_settings().threads
    started = time.perf_counter()
    axes = [axis.values() for axis in options.axes]
    thetas = [np.array(point) for point in itertools.product(*axes)]

    logger.info(f"🚀 Grid search over {len(thetas)} points")
    recorder = _Recorder()
    for theta, result in zip(thetas, _evaluate_many(objective, thetas, threads)):
        recorder.add(theta, result)

    best = recorder.best()
    report = OptimizerReport(
        method="grid",
        best_theta=recorder.thetas[best].tolist(),
        best_value=recorder.values[best],
        final_theta=recorder.thetas[best].tolist(),
        trajectory=recorder.trajectory(),
        evaluations=len(thetas),
        penalized_evaluations=recorder.penalized,
        status="completed",
        wall_time_s=time.perf_counter() - started,
    )
    values = np.array(recorder.values).reshape([axis.size for axis in axes])
    logger.info(f"✅ Grid search done: best {report.best_value:.6g} at {report.best_theta}")
    return GridSearchResult(report=report, axes=axes, values=values)


# =============================================================================
# NELDER-MEAD
# =============================================================================

def nelder_mead(
    objective: SupportsObjective,
    theta0: Sequence[float],
    options: Optional[NelderMeadOptions] = None,
) -> OptimizerReport:
    """
    Simplex search from θ0.

    Args:
        objective: Objective to minimize
        theta0: Starting point (at most 20 parameters)
        options: Evaluation budget, simplex-size tolerance, initial step

    Returns:
        OptimizerReport; status "converged" when the simplex shrank below
        xatol, "max_evals" when the budget ran out

    Raises:
        AppException: NON_FINITE_OBJECTIVE at θ0
    """
    options = options or NelderMeadOptions()
    theta0 = np.asarray(theta0, dtype=float)
    if theta0.ndim != 1 or theta0.size == 0 or theta0.size > MAX_SIMPLEX_PARAMS:
        raise validation_error(f"Nelder-Mead needs 1..{MAX_SIMPLEX_PARAMS} parameters", "theta0")

    started = time.perf_counter()
    recorder = _Recorder()
    first = objective.evaluate(theta0)
    if not math.isfinite(first.value):
        raise non_finite_objective(theta0)
    recorder.add(theta0, first)

    status = "max_evals"
    final = theta0
    if options.max_evals > 0:
        def fn(theta: np.ndarray) -> float:
            value = recorder.add(theta, objective.evaluate(theta))
            return value if math.isfinite(value) else math.inf

        scipy_options = {"maxfev": options.max_evals, "xatol": options.xatol, "fatol": math.inf}
        if options.initial_step is not None:
            scipy_options["initial_simplex"] = np.vstack(
                [theta0, theta0 + options.initial_step * np.eye(theta0.size)]
            )
        result = optimize.minimize(fn, theta0, method="Nelder-Mead", options=scipy_options)
        status = "converged" if result.status == 0 else "max_evals"
        final = np.asarray(result.x, dtype=float)

    best = recorder.best()
    report = OptimizerReport(
        method="nelder_mead",
        best_theta=recorder.thetas[best].tolist(),
        best_value=recorder.values[best],
        final_theta=final.tolist(),
        trajectory=recorder.trajectory(),
        evaluations=len(recorder.values),
        penalized_evaluations=recorder.penalized,
        status=status,
        wall_time_s=time.perf_counter() - started,
    )
    logger.info(f"✅ Nelder-Mead {status} after {report.evaluations} evaluations: {report.best_value:.6g}")
    return report


# =============================================================================
# ADAM ON FINITE DIFFERENCES
# =============================================================================

def sgd_fd(
    objective: SupportsObjective,
    theta0: Sequence[float],
    options: Optional[SGDOptions] = None,
    seed: int = 0,
    threads: Optional[int] = None,
) -> OptimizerReport:
    """
    Adam with central finite-difference gradients on path subsamples.

    Each iteration records the full-ensemble objective at the current θ,
    draws a batch of paths from the subsampling stream, and estimates the
    gradient of objective + l2·|θ|² on that batch with steps
    fd_step·max(1, |θ_j|).

    Args:
        objective: Objective to minimize
        theta0: Finite starting point
        options: Learning rate, batch size, steps, penalty, iterations
        seed: Run seed for the subsampling stream
        threads: Worker cap for the finite-difference probes

    Returns:
        OptimizerReport; status "diverged" when the objective exceeds the
        divergence threshold or stops being finite
    """
    settings = get_settings()
    options = options or SGDOptions()
    threads = threads or settings.threads
    batch = min(options.batch_paths or settings.batch_paths, objective.n_paths)
    fd_step = options.fd_step or settings.fd_step

    theta = np.asarray(theta0, dtype=float).copy()
    if theta.ndim != 1 or not np.all(np.isfinite(theta)):
        raise validation_error("theta0 must be a finite vector", "theta0")

    started = time.perf_counter()
    recorder = _Recorder()
    first_moment = np.zeros_like(theta)
    second_moment = np.zeros_like(theta)
    status = "completed"

    logger.info(f"🚀 Adam on {theta.size} parameters, {options.iterations} iterations, batch {batch}")
    for iteration in range(options.iterations + 1):
        value = recorder.add(theta, objective.evaluate(theta))
        if not math.isfinite(value) or value > settings.divergence_threshold:
            logger.warning(f"⚠️ Diverged at iteration {iteration}: value {value:.3e}")
            status = "diverged"
            break
        if iteration == options.iterations:
            break

        rng = stream_rng(seed, Stream.SUBSAMPLING, iteration)
        indices = np.sort(rng.choice(objective.n_paths, size=batch, replace=False))
        sub = objective.restricted(indices)

        steps = fd_step * np.maximum(1.0, np.abs(theta))
        probes = []
        for j in range(theta.size):
            shift = np.zeros_like(theta)
            shift[j] = steps[j]
            probes.extend([theta + shift, theta - shift])
        values = np.array([r.value for r in _evaluate_many(sub, probes, threads)])
        gradient = (values[0::2] - values[1::2]) / (2.0 * steps) + 2.0 * options.l2 * theta

        t = iteration + 1
        first_moment = options.beta1 * first_moment + (1.0 - options.beta1) * gradient
        second_moment = options.beta2 * second_moment + (1.0 - options.beta2) * gradient ** 2
        m_hat = first_moment / (1.0 - options.beta1 ** t)
        v_hat = second_moment / (1.0 - options.beta2 ** t)
        theta = theta - options.lr * m_hat / (np.sqrt(v_hat) + options.eps)

        if iteration % 10 == 0:
            logger.debug(f"Iteration {iteration}: value {value:.6g}")

    best = recorder.best()
    report = OptimizerReport(
        method="sgd",
        best_theta=recorder.thetas[best].tolist(),
        best_value=recorder.values[best],
        final_theta=theta.tolist(),
        trajectory=recorder.trajectory(),
        evaluations=len(recorder.values) + 2 * theta.size * max(len(recorder.values) - 1, 0),
        penalized_evaluations=recorder.penalized,
        status=status,
        wall_time_s=time.perf_counter() - started,
    )
    logger.info(f"✅ Adam {status}: best {report.best_value:.6g}")
    return report
