"""
==============================================================================
Covariance Kernels Module
==============================================================================

Closed-form covariance functions of the Gaussian source kinds.

Kernels:
--------
- ou: γ(e^{-θ|t-s|} - e^{-θ(s+t)}) from a fixed start, γe^{-θ|t-s|}
  stationary, with γ = σ²/2θ
- gp_gamma_exp: exp(-(|t-s|/|α|)^γ)
- fbm: (t^{2H} + s^{2H} - |t-s|^{2H}) / 2
- gbm (log process) and white_noise_drift: ∫_0^{s∧t} σ(r)² dr with
  σ(r) = sigma + sigma_slope·r

The same functions drive the Cholesky samplers and the contrastivity
checker.

==============================================================================
"""

from __future__ import annotations

from typing import Callable

import numpy as np

from nlica.core.exceptions import unsupported_kind
from nlica.schemas.source import SourceKind, SourceSpec


Kernel = Callable[[np.ndarray, np.ndarray], np.ndarray]


def variance_integral(sigma: float, slope: float, s: np.ndarray, t: np.ndarray) -> np.ndarray:
    """Exact ∫_s^t (sigma + slope·r)² dr."""
    s = np.asarray(s, dtype=float)
    t = np.asarray(t, dtype=float)
    return (
        sigma ** 2 * (t - s)
        + sigma * slope * (t ** 2 - s ** 2)
        + slope ** 2 * (t ** 3 - s ** 3) / 3.0
    )


def covariance_kernel(spec: SourceSpec, coordinate: int) -> Kernel:
    """
    Covariance function κ(s, t) of one coordinate.

    Args:
        spec: Source specification
        coordinate: 0-based coordinate index

    Returns:
        Vectorized callable of two broadcastable time arrays

    Raises:
        AppException: UNSUPPORTED_KIND for copula_markov

    Example:
        >>> kernel = covariance_kernel(fbm_spec, 0)
        >>> kernel(np.array(1.0), np.array(1.0))
        array(1.)
    """
    p = spec.coordinate_params(coordinate)

    if spec.kind == SourceKind.OU:
        theta, gamma = p["theta"], p["sigma"] ** 2 / (2.0 * p["theta"])
        if spec.stationary_start:
            return lambda s, t: gamma * np.exp(-theta * np.abs(t - s))
        return lambda s, t: gamma * (np.exp(-theta * np.abs(t - s)) - np.exp(-theta * (s + t)))

    if spec.kind == SourceKind.GP_GAMMA_EXP:
        power, length = p["gamma"], abs(p["alpha"])
        return lambda s, t: np.exp(-(np.abs(t - s) / length) ** power)

    if spec.kind == SourceKind.FBM:
        twice_h = 2.0 * p["hurst"]
        return lambda s, t: 0.5 * (np.abs(t) ** twice_h + np.abs(s) ** twice_h - np.abs(t - s) ** twice_h)

    if spec.kind in (SourceKind.GBM, SourceKind.WHITE_NOISE_DRIFT):
        sigma, slope = p["sigma"], p["sigma_slope"]
        return lambda s, t: variance_integral(sigma, slope, 0.0, np.minimum(s, t))

    raise unsupported_kind(spec.kind.value, "covariance_kernel")


def covariance_matrix(spec: SourceSpec, coordinate: int, times: np.ndarray) -> np.ndarray:
    """Kernel evaluated on a grid, shape (T, T)."""
    kernel = covariance_kernel(spec, coordinate)
    return kernel(times[:, None], times[None, :])
