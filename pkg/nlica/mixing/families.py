"""
==============================================================================
Map Families Module
==============================================================================

Registered parametrized map families.

Families:
---------
- identity: no parameters; dimension from options["dim"] or the caller
- linear: params = d×d matrix, row-major
- henon: params = [a, b], (x, y) ↦ (1 - ax² + y, bx); inverse
  (u, v) ↦ (v/b, u - 1 + a(v/b)²)
- moebius: params = [Re α, Im α, Re β, Im β, Re γ, Im γ, Re δ, Im δ],
  z ↦ (αz + β)/(γz + δ) on the complex plane
- mlp: params = per layer W (out×in, row-major) then b; options
  {"shape": [d, h1, ..., d], "activation": "tanh" | "leaky_relu",
  "slope": 0.01}; hidden layers are activated, the output layer is linear

henon and moebius accept options["rotation"] in degrees: the map becomes
R∘h∘R⁻¹ with R the planar rotation.

==============================================================================
"""

from __future__ import annotations

import logging
import math
from typing import Any, Callable, Dict, List, Optional, Sequence

import numpy as np

from nlica.core.exceptions import degenerate_parameters, unknown_family, validation_error
from nlica.schemas.mixing import MapSpec
from nlica.sources.rng import Stream, stream_rng

from .maps import ParamMap


# Module logger
logger = logging.getLogger(__name__)

# |det| at or below this value makes a linear or Möbius map degenerate
DETERMINANT_TOL = 1e-12

FamilyBuilder = Callable[[np.ndarray, Dict[str, Any], Optional[int]], ParamMap]


def _expect_count(family: str, params: np.ndarray, count: int) -> None:
    if params.size != count:
        raise validation_error(f"{family} needs {count} parameters, got {params.size}", "params")


def _rotation(options: Dict[str, Any]) -> Optional[np.ndarray]:
    degrees = float(options.get("rotation", 0.0))
    if degrees == 0.0:
        return None
    angle = math.radians(degrees)
    c, s = math.cos(angle), math.sin(angle)
    return np.array([[c, -s], [s, c]])


def _conjugate(
    forward: Callable[[np.ndarray], np.ndarray],
    jacobian: Callable[[np.ndarray], np.ndarray],
    rotation: Optional[np.ndarray],
):
    """R∘f∘R⁻¹ and its Jacobian R·J(R⁻¹z)·R⁻¹ (identity when rotation is None)."""
    if rotation is None:
        return forward, jacobian

    def conjugated(points: np.ndarray) -> np.ndarray:
        return forward(points @ rotation) @ rotation.T

    def conjugated_jacobian(points: np.ndarray) -> np.ndarray:
        return rotation @ jacobian(points @ rotation) @ rotation.T

    return conjugated, conjugated_jacobian


# =============================================================================
# IDENTITY / LINEAR
# =============================================================================

def identity_family(params: np.ndarray, options: Dict[str, Any], dim: Optional[int]) -> ParamMap:
    _expect_count("identity", params, 0)
    dim = int(options.get("dim", dim or 0))
    if dim < 1:
        raise validation_error("identity needs a dimension", "options.dim")

    return ParamMap(
        family="identity",
        params=(),
        dim=dim,
        forward=lambda points: points.copy(),
        jacobian_fn=lambda points: np.broadcast_to(np.eye(dim), (points.shape[0], dim, dim)).copy(),
        inverse_fn=lambda: identity_family(params, options, dim),
        options=dict(options),
    )


def linear_family(params: np.ndarray, options: Dict[str, Any], dim: Optional[int]) -> ParamMap:
    d = int(round(math.sqrt(params.size)))
    if d < 1 or d * d != params.size:
        raise validation_error("linear needs d×d parameters", "params")
    matrix = params.reshape(d, d)
    if abs(np.linalg.det(matrix)) <= DETERMINANT_TOL:
        raise degenerate_parameters("linear map matrix is singular", family="linear")

    return ParamMap(
        family="linear",
        params=params,
        dim=d,
        forward=lambda points: points @ matrix.T,
        jacobian_fn=lambda points: np.broadcast_to(matrix, (points.shape[0], d, d)).copy(),
        inverse_fn=lambda: linear_family(np.linalg.inv(matrix).reshape(-1), options, d),
        options=dict(options),
    )


# =============================================================================
# HÉNON
# =============================================================================

def _henon_parts(a: float, b: float):
    def forward(points: np.ndarray) -> np.ndarray:
        x, y = points[:, 0], points[:, 1]
        return np.column_stack([1.0 - a * x ** 2 + y, b * x])

    def jacobian(points: np.ndarray) -> np.ndarray:
        n = points.shape[0]
        out = np.zeros((n, 2, 2))
        out[:, 0, 0] = -2.0 * a * points[:, 0]
        out[:, 0, 1] = 1.0
        out[:, 1, 0] = b
        return out

    def inverse(points: np.ndarray) -> np.ndarray:
        u, v = points[:, 0], points[:, 1]
        x = v / b
        return np.column_stack([x, u - 1.0 + a * x ** 2])

    def inverse_jacobian(points: np.ndarray) -> np.ndarray:
        n = points.shape[0]
        out = np.zeros((n, 2, 2))
        out[:, 0, 1] = 1.0 / b
        out[:, 1, 0] = 1.0
        out[:, 1, 1] = 2.0 * a * points[:, 1] / b ** 2
        return out

    return forward, jacobian, inverse, inverse_jacobian


def _henon_map(params: np.ndarray, options: Dict[str, Any], inverted: bool) -> ParamMap:
    a, b = float(params[0]), float(params[1])
    forward, jacobian, inverse, inverse_jacobian = _henon_parts(a, b)
    if inverted:
        forward, jacobian = inverse, inverse_jacobian
    forward, jacobian = _conjugate(forward, jacobian, _rotation(options))

    return ParamMap(
        family="henon_inverse" if inverted else "henon",
        params=params,
        dim=2,
        forward=forward,
        jacobian_fn=jacobian,
        inverse_fn=lambda: _henon_map(params, options, not inverted),
        options=dict(options),
    )


def henon_family(params: np.ndarray, options: Dict[str, Any], dim: Optional[int]) -> ParamMap:
    _expect_count("henon", params, 2)
    if params[1] == 0:
        raise degenerate_parameters("henon needs b != 0", family="henon", b=0.0)
    return _henon_map(params, options, inverted=False)


# =============================================================================
# MÖBIUS
# =============================================================================

def _moebius_map(coefficients: np.ndarray, options: Dict[str, Any], family: str) -> ParamMap:
    alpha, beta, gamma, delta = coefficients
    determinant = alpha * delta - beta * gamma
    if abs(determinant) <= DETERMINANT_TOL:
        raise degenerate_parameters("moebius needs αδ - βγ != 0", family="moebius")

    def denominator(points: np.ndarray) -> np.ndarray:
        return gamma * (points[:, 0] + 1j * points[:, 1]) + delta

    def forward(points: np.ndarray) -> np.ndarray:
        z = points[:, 0] + 1j * points[:, 1]
        w = (alpha * z + beta) / (gamma * z + delta)
        return np.column_stack([w.real, w.imag])

    def jacobian(points: np.ndarray) -> np.ndarray:
        derivative = determinant / denominator(points) ** 2
        p, q = derivative.real, derivative.imag
        return np.stack([np.stack([p, -q], axis=-1), np.stack([q, p], axis=-1)], axis=-2)

    rotation = _rotation(options)
    forward, jacobian = _conjugate(forward, jacobian, rotation)

    def defined(points: np.ndarray) -> np.ndarray:
        inner = points if rotation is None else points @ rotation
        return np.abs(denominator(inner)) > DETERMINANT_TOL

    inverse = np.array([delta, -beta, -gamma, alpha])
    inverse_name = "moebius" if family == "moebius_inverse" else "moebius_inverse"

    return ParamMap(
        family=family,
        params=np.column_stack([coefficients.real, coefficients.imag]).reshape(-1),
        dim=2,
        forward=forward,
        jacobian_fn=jacobian,
        inverse_fn=lambda: _moebius_map(inverse, options, inverse_name),
        domain_fn=defined,
        options=dict(options),
    )


def moebius_family(params: np.ndarray, options: Dict[str, Any], dim: Optional[int]) -> ParamMap:
    _expect_count("moebius", params, 8)
    coefficients = params[0::2] + 1j * params[1::2]
    return _moebius_map(coefficients, options, "moebius")


# =============================================================================
# MLP
# =============================================================================

def mlp_parameter_count(shape: Sequence[int]) -> int:
    """Number of weights and biases of a layer shape [d, h1, ..., d]."""
    return sum(n_out * n_in + n_out for n_in, n_out in zip(shape[:-1], shape[1:]))


def _mlp_shape(options: Dict[str, Any], dim: Optional[int]) -> List[int]:
    shape = [int(width) for width in options.get("shape", [])]
    if len(shape) < 2 or min(shape) < 1:
        raise validation_error("mlp needs a layer shape [d, ..., d]", "options.shape")
    if shape[0] != shape[-1] or (dim is not None and shape[0] != dim):
        raise validation_error("mlp input and output width must equal d", "options.shape")
    return shape


def _unpack_layers(params: np.ndarray, shape: Sequence[int]):
    layers, offset = [], 0
    for n_in, n_out in zip(shape[:-1], shape[1:]):
        weight = params[offset:offset + n_out * n_in].reshape(n_out, n_in)
        offset += n_out * n_in
        bias = params[offset:offset + n_out]
        offset += n_out
        layers.append((weight, bias))
    return layers


def mlp_family(params: np.ndarray, options: Dict[str, Any], dim: Optional[int]) -> ParamMap:
    shape = _mlp_shape(options, dim)
    _expect_count("mlp", params, mlp_parameter_count(shape))
    activation = options.get("activation", "tanh")
    slope = float(options.get("slope", 0.01))
    layers = _unpack_layers(params, shape)

    if activation == "tanh":
        act = np.tanh
        act_prime = lambda z: 1.0 - np.tanh(z) ** 2  # noqa: E731
    elif activation == "leaky_relu":
        act = lambda z: np.where(z > 0, z, slope * z)  # noqa: E731
        act_prime = lambda z: np.where(z > 0, 1.0, slope)  # noqa: E731
    else:
        raise validation_error("activation must be tanh or leaky_relu", "options.activation")

    def forward(points: np.ndarray) -> np.ndarray:
        h = points
        for weight, bias in layers[:-1]:
            h = act(h @ weight.T + bias)
        weight, bias = layers[-1]
        return h @ weight.T + bias

    def jacobian(points: np.ndarray) -> np.ndarray:
        h = points
        total = np.broadcast_to(np.eye(shape[0]), (points.shape[0], shape[0], shape[0]))
        for weight, bias in layers[:-1]:
            z = h @ weight.T + bias
            total = act_prime(z)[:, :, None] * (weight @ total)
            h = act(z)
        return layers[-1][0] @ total

    return ParamMap(
        family="mlp",
        params=params,
        dim=shape[0],
        forward=forward,
        jacobian_fn=jacobian,
        options={"shape": shape, "activation": activation, "slope": slope},
    )


def init_mlp_params(
    shape: Sequence[int],
    seed: int,
    scale: float = 1.0,
    stream: Stream = Stream.OPTIMIZER,
) -> List[float]:
    """
    Random MLP parameters: weights N(0, scale²/fan_in), zero biases.

    Example:
        >>> len(init_mlp_params([2, 4, 2], seed=0))
        22
    """
    rng = stream_rng(seed, stream)
    params: List[float] = []
    for n_in, n_out in zip(shape[:-1], shape[1:]):
        params.extend(rng.normal(0.0, scale / math.sqrt(n_in), size=n_out * n_in).tolist())
        params.extend([0.0] * n_out)
    return params


# =============================================================================
# REGISTRY
# =============================================================================

FAMILIES: Dict[str, FamilyBuilder] = {
    "identity": identity_family,
    "linear": linear_family,
    "henon": henon_family,
    "moebius": moebius_family,
    "mlp": mlp_family,
}


def build_map(spec: MapSpec, dim: Optional[int] = None) -> ParamMap:
    """
    Build a ParamMap from its serializable description.

    Args:
        spec: Family, parameters, options and the inverse flag
        dim: Expected dimension (required by identity without options.dim)

    Returns:
        The map, or its analytic inverse when spec.inverse is set

    Raises:
        AppException: UNKNOWN_FAMILY, VALIDATION_ERROR (parameter count or
            options), DEGENERATE_PARAMETERS

    Example:
        >>> henon = build_map(MapSpec(family="henon", params=[1.4, 0.3]))
        >>> henon(np.array([[0.1, 0.2]]))
        array([[1.186, 0.03 ]])
    """
    builder = FAMILIES.get(spec.family)
    if builder is None:
        raise unknown_family(spec.family)

    m = builder(np.asarray(spec.params, dtype=float), dict(spec.options), dim)
    if spec.inverse:
        m = m.inverse()
    if dim is not None and m.dim != dim:
        raise validation_error(f"{spec.family} map has dimension {m.dim}, expected {dim}", "family")
    return m
