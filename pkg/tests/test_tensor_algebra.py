"""
==============================================================================
Tensor Algebra Tests
==============================================================================

Words, shuffles and truncated series arithmetic.

==============================================================================
"""

from collections import Counter
from math import comb

import numpy as np
import pytest

from nlica.algebra import (
    TensorSeries,
    Word,
    concat_product,
    exp_series,
    log_series,
    shuffle,
    word_at,
    words,
)
from nlica.core.exceptions import AppException


def random_series(rng: np.random.Generator, d: int, depth: int, constant: float) -> TensorSeries:
    levels = [np.array([constant])] + [rng.normal(size=d ** m) for m in range(1, depth + 1)]
    return TensorSeries(d, depth, tuple(levels))


class TestWords:
    """Tests for word keys and canonical order."""

    def test_key_roundtrip(self):
        """Test dotted keys parse back to the same word."""
        word = Word((1, 2, 2))
        assert word.key == "1.2.2"
        assert Word.from_key(word.key) == word
        assert Word.from_key("").is_empty

    def test_invalid_letter(self):
        """Test letters below 1 are rejected."""
        with pytest.raises(AppException) as exc_info:
            Word((0, 1))
        assert exc_info.value.code == "INVALID_WORD"

    def test_letter_outside_alphabet(self):
        """Test index() rejects letters above d."""
        with pytest.raises(AppException) as exc_info:
            Word((3,)).index(2)
        assert exc_info.value.code == "INVALID_WORD"

    def test_canonical_positions(self):
        """Test word_at inverts Word.index across a whole level."""
        for position, word in enumerate(words(3, 3)):
            assert word.index(3) == position
            assert word_at(3, 3, position) == word

    def test_letter_counts(self):
        """Test the letter-count vector."""
        assert Word((1, 2, 1)).letter_counts(3).tolist() == [2, 1, 0]


class TestShuffle:
    """Tests for the shuffle product."""

    def test_single_letters(self):
        """Test (1) ⧢ (2) gives both interleavings once."""
        assert shuffle((1,), (2,)) == Counter({Word((1, 2)): 1, Word((2, 1)): 1})

    def test_repeated_letters_multiplicity(self):
        """Test (1,1) ⧢ (1) collapses to (1,1,1) with multiplicity 3."""
        assert shuffle((1, 1), (1,)) == Counter({Word((1, 1, 1)): 3})

    def test_three_interleavings(self):
        """Test (1,2) ⧢ (3)."""
        result = shuffle((1, 2), (3,))
        assert set(result) == {Word((1, 2, 3)), Word((1, 3, 2)), Word((3, 1, 2))}
        assert all(count == 1 for count in result.values())

    def test_total_count(self):
        """Test multiplicities sum to the binomial coefficient."""
        for u, v in [((1, 2), (2, 1)), ((1,), (1, 2, 3)), ((), (2, 2))]:
            assert sum(shuffle(u, v).values()) == comb(len(u) + len(v), len(u))

    def test_empty_word_is_unit(self):
        """Test shuffling with the empty word returns the other word."""
        assert shuffle((), (2, 1)) == Counter({Word((2, 1)): 1})


class TestTensorSeries:
    """Tests for series construction and serialization."""

    def test_from_coefficients(self):
        """Test sparse construction and coefficient lookup."""
        series = TensorSeries.from_coefficients(2, 2, {"": 1.0, "1.2": 0.25})
        assert series.coefficient("1.2") == 0.25
        assert series.coefficient((2, 1)) == 0.0
        assert series.constant == 1.0

    def test_levels_are_read_only(self):
        """Test stored blocks cannot be modified in place."""
        series = TensorSeries.unit(2, 2)
        with pytest.raises(ValueError):
            series.levels[1][0] = 1.0

    def test_level_size_checked(self):
        """Test blocks of the wrong size are rejected."""
        with pytest.raises(AppException) as exc_info:
            TensorSeries(2, 1, (np.ones(1), np.ones(3)))
        assert exc_info.value.code == "DIMENSION_MISMATCH"

    def test_dict_roundtrip(self):
        """Test to_dict/from_dict preserve every coefficient."""
        series = random_series(np.random.default_rng(0), 2, 3, 1.0)
        restored = TensorSeries.from_dict(series.to_dict())
        assert restored.max_abs_diff(series) == 0.0

    def test_incompatible_sum(self):
        """Test adding series of different depth fails."""
        with pytest.raises(AppException) as exc_info:
            TensorSeries.unit(2, 2) + TensorSeries.unit(2, 3)
        assert exc_info.value.code == "DIMENSION_MISMATCH"


class TestConcatProduct:
    """Tests for the truncated concatenation product."""

    def test_distributes(self):
        """Test (ε + 1)(ε + 2) = ε + 1 + 2 + 12."""
        a = TensorSeries.from_coefficients(2, 2, {"": 1.0, "1": 1.0})
        b = TensorSeries.from_coefficients(2, 2, {"": 1.0, "2": 1.0})
        expected = TensorSeries.from_coefficients(2, 2, {"": 1.0, "1": 1.0, "2": 1.0, "1.2": 1.0})
        assert concat_product(a, b).allclose(expected, atol=0.0)

    def test_unit(self):
        """Test the unit series is neutral on both sides."""
        a = random_series(np.random.default_rng(1), 3, 3, 0.5)
        unit = TensorSeries.unit(3, 3)
        assert concat_product(a, unit).allclose(a, atol=0.0)
        assert concat_product(unit, a).allclose(a, atol=0.0)

    def test_letter_squared(self):
        """Test "1"·"1" = "11"."""
        one = TensorSeries.from_coefficients(1, 2, {"1": 1.0})
        assert concat_product(one, one).coefficient("1.1") == 1.0

    def test_associative(self):
        """Test (ab)c = a(bc) on random series."""
        rng = np.random.default_rng(2)
        a, b, c = (random_series(rng, 2, 4, 1.0) for _ in range(3))
        left = concat_product(concat_product(a, b), c)
        right = concat_product(a, concat_product(b, c))
        assert left.max_abs_diff(right) < 1e-12


class TestExpLog:
    """Tests for the exponential and logarithm."""

    def test_exp_zero(self):
        """Test exp(0) is the unit."""
        assert exp_series(TensorSeries.zero(2, 3)).allclose(TensorSeries.unit(2, 3), atol=0.0)

    def test_exp_scalar_letter(self):
        """Test exp(c·1) in one letter reproduces the scalar series."""
        c = 0.7
        result = exp_series(TensorSeries.from_coefficients(1, 3, {"1": c}))
        assert result.coefficient("1") == pytest.approx(c)
        assert result.coefficient("1.1") == pytest.approx(c ** 2 / 2)
        assert result.coefficient("1.1.1") == pytest.approx(c ** 3 / 6)

    def test_exp_two_letters(self):
        """Test exp(2·1 + 3·2) at depth 2."""
        result = exp_series(TensorSeries.from_coefficients(2, 2, {"1": 2.0, "2": 3.0}))
        assert result.coefficient("1.1") == pytest.approx(2.0)
        assert result.coefficient("1.2") == pytest.approx(3.0)
        assert result.coefficient("2.1") == pytest.approx(3.0)
        assert result.coefficient("2.2") == pytest.approx(4.5)

    def test_exp_needs_zero_constant(self):
        """Test exp rejects a non-zero constant term."""
        with pytest.raises(AppException) as exc_info:
            exp_series(TensorSeries.unit(2, 2))
        assert exc_info.value.code == "VALIDATION_ERROR"
        assert exc_info.value.exit_code == 2
        assert exc_info.value.details == {"field": "constant", "expected": 0.0, "value": 1.0}

    def test_log_unit(self):
        """Test log(1) is zero."""
        assert log_series(TensorSeries.unit(2, 3)).allclose(TensorSeries.zero(2, 3), atol=0.0)

    def test_log_level_two(self):
        """Test κ_11 = σ_11 - σ_1²/2."""
        result = log_series(TensorSeries.from_coefficients(1, 2, {"": 1.0, "1.1": 0.5}))
        assert result.coefficient("1") == 0.0
        assert result.coefficient("1.1") == pytest.approx(0.5)

    def test_log_needs_unit_constant(self):
        """Test log rejects a constant term other than 1."""
        with pytest.raises(AppException) as exc_info:
            log_series(TensorSeries.zero(2, 2))
        assert exc_info.value.code == "VALIDATION_ERROR"
        assert exc_info.value.details == {"field": "constant", "expected": 1.0, "value": 0.0}
        assert "log_series" in exc_info.value.message

    def test_log_exp_roundtrip(self):
        """Test log(exp(a)) = a on random instances."""
        rng = np.random.default_rng(3)
        for _ in range(100):
            a = random_series(rng, 3, 5, 0.0).scale(0.3)
            assert log_series(exp_series(a)).max_abs_diff(a) < 1e-12

    def test_exp_log_roundtrip(self):
        """Test exp(log(x)) = x for group-like inputs."""
        rng = np.random.default_rng(4)
        x = exp_series(random_series(rng, 2, 4, 0.0).scale(0.5))
        assert exp_series(log_series(x)).max_abs_diff(x) < 1e-12
