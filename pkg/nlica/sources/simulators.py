"""
==============================================================================
Source Simulators Module
==============================================================================

Samplers for ensembles with mutually independent coordinate processes.

Kinds:
------
- ou: exact Gaussian transition
      X' = μ + (X - μ)e^{-θΔ} + σ sqrt((1 - e^{-2θΔ})/(2θ)) Z
  started from N(μ, σ²/2θ) or from the fixed value a
- gp_gamma_exp / fbm: Cholesky factor of the grid covariance (fbm is pinned
  to 0 at time 0)
- gbm: exact log-normal solution with σ(t) = sigma + sigma_slope·t
- white_noise_drift: drift μ(t) = drift + drift_slope·t plus Gaussian noise
  with the same time-varying level
- copula_markov: stationary Markov chain U_{k+1} = h^{-1}(W | U_k) mapped
  through the standard normal quantile function

Each coordinate and path draws from its own stream (see rng.py), so the
output does not depend on the number of workers.

==============================================================================
"""

from __future__ import annotations

import logging
from concurrent.futures import ThreadPoolExecutor
from typing import Callable, Dict, Optional

import numpy as np
from scipy import linalg, stats

from nlica.config import get_settings
from nlica.core.exceptions import not_positive_definite
from nlica.schemas.source import SourceKind, SourceSpec
from nlica.signatures.paths import PathEnsemble

from .copulas import conditional_copula_inverse
from .kernels import covariance_matrix, variance_integral
from .rng import path_normals, path_uniforms


# Module logger
logger = logging.getLogger(__name__)

CoordinateSampler = Callable[[SourceSpec, int, np.ndarray], np.ndarray]

# Chain states stay strictly inside (0, 1) so the normal quantile is finite
UNIT_FLOOR = np.finfo(float).tiny
UNIT_CEILING = 1.0 - np.finfo(float).epsneg


def cholesky_factor(
    covariance: np.ndarray,
    kind: str,
    coordinate: int,
    jitter: Optional[float] = None,
) -> np.ndarray:
    """
    Lower Cholesky factor, retried once with jitter on the diagonal.

    Raises:
        AppException: NOT_POSITIVE_DEFINITE if the jittered matrix also fails
    """
    jitter = get_settings().cholesky_jitter if jitter is None else jitter
    try:
        return linalg.cholesky(covariance, lower=True)
    except linalg.LinAlgError:
        logger.warning(f"⚠️ Covariance of {kind} coordinate {coordinate + 1} needs jitter {jitter:g}")
    try:
        return linalg.cholesky(covariance + jitter * np.eye(covariance.shape[0]), lower=True)
    except linalg.LinAlgError:
        raise not_positive_definite(kind, coordinate + 1)


# =============================================================================
# COORDINATE SAMPLERS
# =============================================================================
# Each returns shape (n_paths, T) for one coordinate.

def _sample_ou(spec: SourceSpec, coordinate: int, times: np.ndarray) -> np.ndarray:
    p = spec.coordinate_params(coordinate)
    theta, sigma, mu = p["theta"], p["sigma"], p["mu"]
    z = path_normals(spec.seed, coordinate, spec.n_paths, times.size)

    steps = np.diff(times)
    decay = np.exp(-theta * steps)
    spread = sigma * np.sqrt(-np.expm1(-2.0 * theta * steps) / (2.0 * theta))

    out = np.empty((spec.n_paths, times.size))
    if spec.stationary_start:
        out[:, 0] = mu + sigma / np.sqrt(2.0 * theta) * z[:, 0]
    else:
        out[:, 0] = p["a"]
    for j in range(steps.size):
        out[:, j + 1] = mu + (out[:, j] - mu) * decay[j] + spread[j] * z[:, j + 1]
    return out


def _sample_gp(spec: SourceSpec, coordinate: int, times: np.ndarray) -> np.ndarray:
    factor = cholesky_factor(covariance_matrix(spec, coordinate, times), spec.kind.value, coordinate)
    z = path_normals(spec.seed, coordinate, spec.n_paths, times.size)
    return spec.coordinate_params(coordinate)["mean"] + z @ factor.T


def _sample_fbm(spec: SourceSpec, coordinate: int, times: np.ndarray) -> np.ndarray:
    inner = times[1:]
    factor = cholesky_factor(covariance_matrix(spec, coordinate, inner), spec.kind.value, coordinate)
    z = path_normals(spec.seed, coordinate, spec.n_paths, inner.size)
    out = np.zeros((spec.n_paths, times.size))
    out[:, 1:] = z @ factor.T
    return out


def _sample_gbm(spec: SourceSpec, coordinate: int, times: np.ndarray) -> np.ndarray:
    p = spec.coordinate_params(coordinate)
    variance = variance_integral(p["sigma"], p["sigma_slope"], times[:-1], times[1:])
    z = path_normals(spec.seed, coordinate, spec.n_paths, times.size - 1)

    log_steps = p["drift"] * np.diff(times) - 0.5 * variance + np.sqrt(variance) * z
    out = np.empty((spec.n_paths, times.size))
    out[:, 0] = 0.0
    out[:, 1:] = np.cumsum(log_steps, axis=1)
    return p["s0"] * np.exp(out)


def _sample_white_noise(spec: SourceSpec, coordinate: int, times: np.ndarray) -> np.ndarray:
    p = spec.coordinate_params(coordinate)
    s, t = times[:-1], times[1:]
    mean_steps = p["drift"] * (t - s) + 0.5 * p["drift_slope"] * (t ** 2 - s ** 2)
    variance = variance_integral(p["sigma"], p["sigma_slope"], s, t)
    z = path_normals(spec.seed, coordinate, spec.n_paths, times.size - 1)

    out = np.empty((spec.n_paths, times.size))
    out[:, 0] = p["start"]
    out[:, 1:] = p["start"] + np.cumsum(mean_steps + np.sqrt(variance) * z, axis=1)
    return out


def _sample_copula_chain(spec: SourceSpec, coordinate: int, times: np.ndarray) -> np.ndarray:
    theta = spec.coordinate_params(coordinate)["theta"]
    draws = path_uniforms(spec.seed, coordinate, spec.n_paths, times.size)
    states = np.empty_like(draws)
    states[:, 0] = draws[:, 0]
    for j in range(1, times.size):
        step = conditional_copula_inverse(spec.copula_family, theta, states[:, j - 1], draws[:, j])
        states[:, j] = np.clip(step, UNIT_FLOOR, UNIT_CEILING)
    return stats.norm.ppf(states)


SAMPLERS: Dict[SourceKind, CoordinateSampler] = {
    SourceKind.OU: _sample_ou,
    SourceKind.GP_GAMMA_EXP: _sample_gp,
    SourceKind.FBM: _sample_fbm,
    SourceKind.GBM: _sample_gbm,
    SourceKind.WHITE_NOISE_DRIFT: _sample_white_noise,
    SourceKind.COPULA_MARKOV: _sample_copula_chain,
}


# =============================================================================
# ENTRY POINT
# =============================================================================

def simulate(spec: SourceSpec, threads: Optional[int] = None) -> PathEnsemble:
    """
    Simulate an ensemble of independent-component paths.

    Args:
        spec: Validated source spec
        threads: Worker cap across coordinates (uses settings if None)

    Returns:
        PathEnsemble of shape (n_paths, n_steps + 1, d) labelled by kind

    Raises:
        AppException: NOT_POSITIVE_DEFINITE for covariances that fail
            factorization after jitter

    Example:
        >>> spec = SourceSpec(kind="fbm", d=2, n_paths=64, n_steps=100, seed=1,
        ...                   params={"hurst": [0.3, 0.7]})
        >>> simulate(spec).values.shape
        (64, 101, 2)
    """
    threads = threads or get_settings().threads
    times = spec.times
    sampler = SAMPLERS[spec.kind]

    logger.debug(f"Simulating {spec.kind.value}: d={spec.d}, paths={spec.n_paths}, steps={spec.n_steps}")
    if threads <= 1 or spec.d == 1:
        columns = [sampler(spec, k, times) for k in range(spec.d)]
    else:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            columns = list(pool.map(lambda k: sampler(spec, k, times), range(spec.d)))

    values = np.stack(columns, axis=-1)
    return PathEnsemble(
        times,
        values,
        label=spec.kind.value,
        seed=spec.seed,
        metadata={"kind": spec.kind.value, "d": spec.d},
    )
