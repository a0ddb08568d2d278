"""
==============================================================================
Tensor Series Module
==============================================================================

Truncated formal power series over words, stored as dense level blocks.

Level m of a series over d letters holds d^m real coefficients in canonical
(lexicographic) word order, so the concatenation product of two levels is a
flattened outer product. Every series is immutable once constructed and can
be shared freely between threads.

This module implements:
- TensorSeries: the immutable series value
- concat_product: truncated concatenation product
- exp_series / log_series: exponential and logarithm of series

JSON Structure:
--------------
{"d": 2, "depth": 2, "coeffs": {"": 1.0, "1": 0.5, "1.2": 0.25, ...}}

==============================================================================
"""

from __future__ import annotations

import logging
from dataclasses import dataclass
from typing import Any, Dict, Iterator, Mapping, Sequence, Tuple, Union

import numpy as np

from nlica.core.exceptions import (
    constant_term_invalid,
    dimension_mismatch,
    validation_error,
)

from .words import Word, word_at


# Module logger
logger = logging.getLogger(__name__)

# Tolerance on the constant term for exp/log preconditions
CONSTANT_TERM_TOL = 1e-12

WordLike = Union[Word, str, Sequence[int]]


def _as_word(word: WordLike) -> Word:
    if isinstance(word, Word):
        return word
    if isinstance(word, str):
        return Word.from_key(word)
    return Word(tuple(word))


def _frozen(array: np.ndarray) -> np.ndarray:
    array = np.array(array, dtype=float, copy=True)
    array.setflags(write=False)
    return array


@dataclass(frozen=True, eq=False)
class TensorSeries:
    """
    Truncated series over words of length at most `depth` in `d` letters.

    Attributes:
        d: Alphabet size
        depth: Truncation depth M
        levels: Tuple of M+1 read-only arrays; levels[m] has d**m entries

    Example:
        >>> a = TensorSeries.from_coefficients(2, 2, {"1": 2.0, "2": 3.0})
        >>> exp_series(a).coefficient("2.2")
        4.5
    """

    d: int
    depth: int
    levels: Tuple[np.ndarray, ...]

    def __post_init__(self) -> None:
        if self.d < 1 or self.depth < 0:
            raise validation_error("d must be positive and depth non-negative", "depth")
        if len(self.levels) != self.depth + 1:
            raise dimension_mismatch(
                "Series must hold one block per level",
                expected=self.depth + 1,
                received=len(self.levels),
            )
        frozen = []
        for m, block in enumerate(self.levels):
            block = np.asarray(block, dtype=float).reshape(-1)
            if block.size != self.d ** m:
                raise dimension_mismatch(
                    f"Level {m} must hold {self.d ** m} coefficients",
                    level=m,
                    received=int(block.size),
                )
            frozen.append(_frozen(block))
        object.__setattr__(self, "levels", tuple(frozen))

    # =========================================================================
    # CONSTRUCTION
    # =========================================================================

    @classmethod
    def zero(cls, d: int, depth: int) -> "TensorSeries":
        """The zero series."""
        return cls(d, depth, tuple(np.zeros(d ** m) for m in range(depth + 1)))

    @classmethod
    def unit(cls, d: int, depth: int) -> "TensorSeries":
        """The series with empty-word coefficient 1 and nothing else."""
        levels = [np.zeros(d ** m) for m in range(depth + 1)]
        levels[0][0] = 1.0
        return cls(d, depth, tuple(levels))

    @classmethod
    def from_coefficients(
        cls,
        d: int,
        depth: int,
        coefficients: Mapping[WordLike, float]
    ) -> "TensorSeries":
        """
        Build a series from a sparse word -> coefficient mapping.

        Args:
            d: Alphabet size
            depth: Truncation depth
            coefficients: Words (Word, dotted key or letter tuple) to values

        Raises:
            AppException: INVALID_WORD for letters outside {1..d},
                DIMENSION_MISMATCH for words longer than depth
        """
        levels = [np.zeros(d ** m) for m in range(depth + 1)]
        for raw_word, value in coefficients.items():
            word = _as_word(raw_word)
            if len(word) > depth:
                raise dimension_mismatch(
                    f"Word {word.key} exceeds depth {depth}",
                    word=word.key,
                    depth=depth,
                )
            levels[len(word)][word.index(d)] = float(value)
        return cls(d, depth, tuple(levels))

    @classmethod
    def from_dict(cls, payload: Mapping[str, Any]) -> "TensorSeries":
        """Rebuild a series from its JSON form."""
        try:
            d = int(payload["d"])
            depth = int(payload["depth"])
            coeffs = payload.get("coeffs", {})
        except (KeyError, TypeError, ValueError) as exc:
            raise validation_error(f"invalid series payload ({exc})", "coeffs")
        return cls.from_coefficients(d, depth, {str(k): float(v) for k, v in coeffs.items()})

    # =========================================================================
    # ACCESS
    # =========================================================================

    def level(self, m: int) -> np.ndarray:
        """Read-only coefficient block of level m."""
        return self.levels[m]

    def coefficient(self, word: WordLike) -> float:
        """Coefficient of a word; 0 for words beyond the depth."""
        word = _as_word(word)
        if len(word) > self.depth:
            return 0.0
        return float(self.levels[len(word)][word.index(self.d)])

    def __getitem__(self, word: WordLike) -> float:
        return self.coefficient(word)

    def coefficients(self, include_zero: bool = True) -> Iterator[Tuple[Word, float]]:
        """Iterate (word, coefficient) in canonical order."""
        for m, block in enumerate(self.levels):
            for position, value in enumerate(block):
                if include_zero or value != 0.0:
                    yield word_at(self.d, m, position), float(value)

    @property
    def constant(self) -> float:
        """Empty-word coefficient."""
        return float(self.levels[0][0])

    def to_dict(self) -> Dict[str, Any]:
        """JSON form with every coefficient in canonical order."""
        return {
            "d": self.d,
            "depth": self.depth,
            "coeffs": {word.key: value for word, value in self.coefficients()},
        }

    # =========================================================================
    # LINEAR STRUCTURE
    # =========================================================================

    def _check_compatible(self, other: "TensorSeries") -> None:
        if self.d != other.d or self.depth != other.depth:
            raise dimension_mismatch(
                "Series dimension/depth mismatch",
                left={"d": self.d, "depth": self.depth},
                right={"d": other.d, "depth": other.depth},
            )

    def __add__(self, other: "TensorSeries") -> "TensorSeries":
        self._check_compatible(other)
        return TensorSeries(self.d, self.depth, tuple(a + b for a, b in zip(self.levels, other.levels)))

    def __sub__(self, other: "TensorSeries") -> "TensorSeries":
        self._check_compatible(other)
        return TensorSeries(self.d, self.depth, tuple(a - b for a, b in zip(self.levels, other.levels)))

    def scale(self, factor: float) -> "TensorSeries":
        """Multiply every coefficient by a scalar."""
        return TensorSeries(self.d, self.depth, tuple(block * factor for block in self.levels))

    def with_constant(self, value: float) -> "TensorSeries":
        """Copy with the empty-word coefficient replaced."""
        levels = list(self.levels)
        levels[0] = np.array([value], dtype=float)
        return TensorSeries(self.d, self.depth, tuple(levels))

    def allclose(self, other: "TensorSeries", atol: float = 1e-12) -> bool:
        """Coefficient-wise comparison within an absolute tolerance."""
        self._check_compatible(other)
        return all(np.allclose(a, b, rtol=0.0, atol=atol) for a, b in zip(self.levels, other.levels))

    def max_abs_diff(self, other: "TensorSeries") -> float:
        """Largest coefficient-wise absolute difference."""
        self._check_compatible(other)
        return max(float(np.max(np.abs(a - b))) for a, b in zip(self.levels, other.levels))


# =============================================================================
# PRODUCTS AND TRANSCENDENTAL FUNCTIONS
# =============================================================================

def concat_product(a: TensorSeries, b: TensorSeries) -> TensorSeries:
    """
    Truncated concatenation product.

    The coefficient of w is the sum over splittings w = u·v of a(u)·b(v);
    in block form level m is the sum over k of outer(a_k, b_{m-k}).

    Args:
        a: Left factor
        b: Right factor

    Returns:
        Product truncated at the common depth

    Raises:
        AppException: DIMENSION_MISMATCH if d or depth differ
    """
    a._check_compatible(b)
    levels = []
    for m in range(a.depth + 1):
        block = np.zeros(a.d ** m)
        for k in range(m + 1):
            block += np.outer(a.levels[k], b.levels[m - k]).reshape(-1)
        levels.append(block)
    return TensorSeries(a.d, a.depth, tuple(levels))


def exp_series(a: TensorSeries) -> TensorSeries:
    """
    Exponential sum_{n<=M} a^n / n! of a series with zero constant term.

    Raises:
        AppException: VALIDATION_ERROR if the constant term is nonzero
    """
    if abs(a.constant) > CONSTANT_TERM_TOL:
        raise constant_term_invalid("exp_series", 0.0, a.constant)
    a = a.with_constant(0.0)
    result = TensorSeries.unit(a.d, a.depth)
    term = result
    for n in range(1, a.depth + 1):
        term = concat_product(term, a).scale(1.0 / n)
        result = result + term
    return result


def log_series(a: TensorSeries) -> TensorSeries:
    """
    Logarithm sum_{n<=M} (-1)^(n-1)/n (a - 1)^n of a group-like series.

    Raises:
        AppException: VALIDATION_ERROR if the constant term is not 1
    """
    if abs(a.constant - 1.0) > CONSTANT_TERM_TOL:
        raise constant_term_invalid("log_series", 1.0, a.constant)
    x = a.with_constant(0.0)
    result = TensorSeries.zero(a.d, a.depth)
    power = TensorSeries.unit(a.d, a.depth)
    for n in range(1, a.depth + 1):
        power = concat_product(power, x)
        result = result + power.scale((-1.0) ** (n - 1) / n)
    return result


__all__ = [
    "TensorSeries",
    "concat_product",
    "exp_series",
    "log_series",
]
