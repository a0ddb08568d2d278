"""
==============================================================================
Independence Contrast Module
==============================================================================

Standardized signature cumulants and the cross-cumulant independence
contrast.

A cross pair for coordinate k joins a nonempty word i over {1..k-1} with a
nonempty run j of the letter k. The coordinates of a process are mutually
independent exactly when, for every cross pair, the cumulants of the words
in the shuffle of i and j sum to zero (counted with multiplicity). The
contrast sums the squares of these standardized sums over all pairs with
|i| + |j| <= mu.

==============================================================================
"""

from __future__ import annotations

import itertools
import logging
import math
from functools import lru_cache, reduce
from typing import List, Optional, Tuple

import numpy as np

from nlica.algebra import TensorSeries, Word, shuffle
from nlica.config import get_settings
from nlica.core.exceptions import (
    degenerate_normalization,
    mu_exceeds_depth,
    validation_error,
)
from nlica.schemas.results import ContrastResult

from .engine import SignatureEngine
from .paths import PathEnsemble, preprocess


# Module logger
logger = logging.getLogger(__name__)


# =============================================================================
# STANDARDIZATION
# =============================================================================

def standardized_cumulants(
    cumulants: TensorSeries,
    epsilon: Optional[float] = None,
) -> TensorSeries:
    """
    Divide each cumulant by prod_ν κ_νν^(η_ν/2).

    η_ν counts the occurrences of letter ν in the word, so level m is divided
    by the m-fold outer product of the vector (sqrt κ_11, ..., sqrt κ_dd).

    Args:
        cumulants: Signature cumulants (depth >= 2)
        epsilon: Degeneracy threshold (uses settings if None)

    Returns:
        Standardized series with κ̄_νν = 1

    Raises:
        AppException: DEGENERATE_NORMALIZATION if some κ_νν <= epsilon
    """
    if cumulants.depth < 2:
        raise validation_error("standardization needs depth >= 2", "depth")
    epsilon = get_settings().norm_epsilon if epsilon is None else epsilon

    d = cumulants.d
    diagonal = cumulants.level(2).reshape(d, d).diagonal()
    for nu, value in enumerate(diagonal, start=1):
        if not value > epsilon:
            raise degenerate_normalization(nu, float(value))

    root = np.sqrt(diagonal)
    levels = [np.array(cumulants.level(0))]
    for m in range(1, cumulants.depth + 1):
        normalizer = reduce(np.multiply.outer, [root] * m).reshape(-1)
        levels.append(cumulants.level(m) / normalizer)

    levels[2] = levels[2].copy()
    levels[2][np.arange(d) * (d + 1)] = 1.0
    return TensorSeries(d, cumulants.depth, tuple(levels))


# =============================================================================
# CROSS WORDS
# =============================================================================

CrossPair = Tuple[Word, Word]


@lru_cache(maxsize=64)
def _cross_pairs(d: int, mu: int) -> Tuple[Tuple[Word, Word, Tuple[Tuple[Word, int], ...]], ...]:
    pairs = []
    for k in range(2, d + 1):
        for run in range(1, mu):
            block = Word((k,) * run)
            for length in range(1, mu - run + 1):
                for letters in itertools.product(range(1, k), repeat=length):
                    prefix = Word(letters)
                    interleavings = sorted(shuffle(prefix, block).items(), key=lambda item: item[0].letters)
                    pairs.append((prefix, block, tuple(interleavings)))
    return tuple(pairs)


@lru_cache(maxsize=64)
def _cross_words(d: int, mu: int) -> Tuple[Word, ...]:
    found = {word for _, _, interleavings in _cross_pairs(d, mu) for word, _ in interleavings}
    return tuple(sorted(found, key=lambda w: (len(w), w.letters)))


def _check_dimensions(d: int, mu: int) -> None:
    if d < 2:
        raise validation_error("the contrast needs d >= 2", "d")
    if mu < 2:
        raise validation_error("mu must be at least 2", "mu")


def pair_key(prefix: Word, block: Word) -> str:
    """
    Term key of a cross pair, e.g. "1.1|2" for the pair (11, 2).
    """
    return f"{prefix.key}|{block.key}"


def cross_pairs(d: int, mu: int) -> List[CrossPair]:
    """
    Pairs (i, j) whose shuffles index the contrast terms.

    For k = 2..d, i is a nonempty word over {1..k-1} and j is a run of m >= 1
    letters k with |i| + m <= mu. Ordered by k, then run length, then prefix
    length, then lexicographically.

    Args:
        d: Dimension (>= 2)
        mu: Maximal word length (>= 2)

    Raises:
        AppException: VALIDATION_ERROR if d < 2 or mu < 2

    Example:
        >>> [pair_key(i, j) for i, j in cross_pairs(2, 3)]
        ['1|2', '1.1|2', '1|2.2']
    """
    _check_dimensions(d, mu)
    return [(prefix, block) for prefix, block, _ in _cross_pairs(d, mu)]


def cross_index_set(d: int, mu: int) -> List[Word]:
    """
    Cross words of length at most mu over {1..d}.

    The union over k = 2..d of shuffles of a nonempty word over {1..k-1}
    with a run of k's, without duplicates, ordered by length then
    lexicographically.

    Args:
        d: Dimension (>= 2)
        mu: Maximal word length (>= 2)

    Raises:
        AppException: VALIDATION_ERROR if d < 2 or mu < 2

    Example:
        >>> [w.key for w in cross_index_set(2, 2)]
        ['1.2', '2.1']
    """
    _check_dimensions(d, mu)
    return list(_cross_words(d, mu))


# =============================================================================
# CONTRAST
# =============================================================================

def contrast_from_cumulants(
    cumulants: TensorSeries,
    mu: int,
    epsilon: Optional[float] = None,
) -> ContrastResult:
    """
    Sum over cross pairs of the squared shuffle-paired standardized cumulants.

    Each term is (Σ_h c_h κ̄_h)² where h runs over the shuffle of the pair
    with multiplicity c_h. Individual cross cumulants need not vanish for
    independent coordinates; these paired sums do.

    Args:
        cumulants: Signature cumulants
        mu: Maximal cross-word length (<= depth)
        epsilon: Degeneracy threshold (uses settings if None)

    Returns:
        ContrastResult with terms keyed by pair_key
    """
    if mu > cumulants.depth:
        raise mu_exceeds_depth(mu, cumulants.depth)
    _check_dimensions(cumulants.d, mu)
    standardized = standardized_cumulants(cumulants, epsilon)

    terms = {}
    for prefix, block, interleavings in _cross_pairs(cumulants.d, mu):
        paired = math.fsum(count * standardized.coefficient(word) for word, count in interleavings)
        terms[pair_key(prefix, block)] = paired ** 2
    total = math.fsum(terms.values())
    return ContrastResult(depth=cumulants.depth, mu=mu, contrast=total, terms=terms)


def contrast_ic(
    ensemble: PathEnsemble,
    depth: int,
    mu: int,
    center: bool = True,
    scale: bool = True,
    epsilon: Optional[float] = None,
    threads: Optional[int] = None,
) -> ContrastResult:
    """
    Independence contrast of an ensemble.

    Args:
        ensemble: Observed paths
        depth: Signature truncation depth M
        mu: Maximal cross-word length (2 <= mu <= depth)
        center: Center coordinates before signing
        scale: Scale coordinates to unit amplitude before signing
        epsilon: Degeneracy threshold (uses settings if None)
        threads: Worker cap for signatures (uses settings if None)

    Returns:
        ContrastResult with the total and the per-word terms

    Raises:
        AppException: MU_EXCEEDS_DEPTH, VALIDATION_ERROR (d < 2),
            DEGENERATE_NORMALIZATION

    Example:
        >>> result = contrast_ic(ensemble, depth=5, mu=5)
        >>> result.contrast >= 0
        True
    """
    if mu > depth:
        raise mu_exceeds_depth(mu, depth)
    if ensemble.d < 2:
        raise validation_error("the contrast needs d >= 2", "d")

    prepared = preprocess(ensemble, center=center, scale=scale)
    cumulants = SignatureEngine(depth, threads=threads).signature_cumulants(prepared)
    return contrast_from_cumulants(cumulants, mu, epsilon)
