"""
==============================================================================
Evaluation Metric Tests
==============================================================================

Kendall's tau, concordance matrices and monomial discordance.

==============================================================================
"""

import itertools

import numpy as np
import pytest
from scipy.optimize import linear_sum_assignment

from nlica.core.exceptions import AppException
from nlica.metrics import (
    concordance_matrix,
    kendall_tau,
    kendall_tau_matrix,
    match_permutation,
    monomial_discordance,
)
from nlica.schemas.results import ConcordanceMode
from nlica.signatures.paths import PathEnsemble


def brute_force_tau(a, b) -> float:
    n = len(a)
    balance = sum(
        np.sign(a[i] - a[j]) * np.sign(b[i] - b[j])
        for i, j in itertools.combinations(range(n), 2)
    )
    return balance / (n * (n - 1) / 2)


def swap_monotone(values: np.ndarray) -> np.ndarray:
    """(x1, x2) ↦ (x2³, exp(x1)), monotone in each coordinate."""
    return np.stack([values[..., 1] ** 3, np.exp(values[..., 0])], axis=-1)


# ============================================================================
# KENDALL'S TAU
# ============================================================================

class TestKendallTau:
    """Tests for Kendall's tau-a."""

    def test_perfect_agreement(self):
        """Test tau(x, x) = 1 and tau(x, -x) = -1."""
        x = np.random.default_rng(0).normal(size=50)
        assert kendall_tau(x, x) == 1.0
        assert kendall_tau(x, -x) == -1.0

    def test_small_example(self):
        """Test one concordant and two discordant pairs."""
        assert kendall_tau([1, 2, 3], [3, 1, 2]) == pytest.approx(-1 / 3)

    def test_ties_count_as_neither(self):
        """Test tied pairs shrink the value toward zero."""
        assert kendall_tau([1, 1, 2], [1, 2, 3]) == pytest.approx(2 / 3)

    def test_matches_brute_force(self):
        """Test the merge-sort count against the O(n²) definition."""
        rng = np.random.default_rng(1)
        for _ in range(20):
            a = rng.integers(0, 5, size=40).astype(float)
            b = rng.integers(0, 5, size=40).astype(float)
            assert kendall_tau(a, b) == pytest.approx(brute_force_tau(a, b), abs=1e-12)

    def test_monotone_invariance(self):
        """Test strictly increasing transforms leave tau unchanged."""
        rng = np.random.default_rng(2)
        a, b = rng.normal(size=(2, 200))
        assert kendall_tau(np.exp(a), b ** 3) == pytest.approx(kendall_tau(a, b), abs=1e-12)

    def test_length_mismatch(self):
        """Test samples of unequal length."""
        with pytest.raises(AppException) as exc_info:
            kendall_tau([1, 2, 3], [1, 2])
        assert exc_info.value.code == "DIMENSION_MISMATCH"

    def test_too_few_pairs(self):
        """Test a single pair is rejected."""
        with pytest.raises(AppException) as exc_info:
            kendall_tau([1.0], [2.0])
        assert exc_info.value.code == "VALIDATION_ERROR"

    def test_matrix_agrees_with_pairwise(self):
        """Test every matrix entry equals the pairwise value."""
        rng = np.random.default_rng(3)
        a = rng.integers(0, 6, size=(80, 3)).astype(float)
        b = rng.normal(size=(80, 2))
        matrix = kendall_tau_matrix(a, b)
        assert matrix.shape == (3, 2)
        for i in range(3):
            for j in range(2):
                assert matrix[i, j] == pytest.approx(kendall_tau(a[:, i], b[:, j]), abs=1e-12)


# ============================================================================
# CONCORDANCE
# ============================================================================

class TestConcordanceMatrix:
    """Tests for averaged absolute Kendall correlations."""

    @pytest.fixture
    def sources(self) -> PathEnsemble:
        values = np.random.default_rng(4).normal(size=(200, 5, 2))
        values[:, 0] = 0.0
        return PathEnsemble(np.arange(5.0), values)

    def test_self_concordance(self, sources):
        """Test the diagonal is 1 when the estimate is the sources."""
        c = concordance_matrix(sources, sources)
        assert c.mode == ConcordanceMode.ENSEMBLE
        assert np.diag(c.entries).tolist() == [1.0, 1.0]

    def test_swapped_monotone(self, sources):
        """Test a swap with monotone maps puts 1 on the anti-diagonal."""
        estimate = sources.with_values(swap_monotone(sources.values))
        entries = np.array(concordance_matrix(sources, estimate).entries)
        assert entries[0, 1] == 1.0
        assert entries[1, 0] == 1.0
        assert np.all((entries >= 0) & (entries <= 1))

    def test_single_path_default(self):
        """Test one path falls back to time-point pairing."""
        values = np.random.default_rng(5).normal(size=(1, 300, 2))
        x = PathEnsemble(np.linspace(0, 1, 300), values)
        c = concordance_matrix(x, x)
        assert c.mode == ConcordanceMode.SINGLE_PATH
        assert np.diag(c.entries).tolist() == [1.0, 1.0]

    def test_grid_mismatch(self, sources):
        """Test ensembles on different grids are incompatible."""
        shifted = PathEnsemble(sources.times + 1.0, sources.values)
        with pytest.raises(AppException) as exc_info:
            concordance_matrix(sources, shifted)
        assert exc_info.value.code == "DIMENSION_MISMATCH"

    def test_ensemble_mode_needs_paths(self):
        """Test forcing ensemble mode on a single path."""
        x = PathEnsemble(np.linspace(0, 1, 10), np.random.default_rng(6).normal(size=(1, 10, 2)))
        with pytest.raises(AppException) as exc_info:
            concordance_matrix(x, x, mode="ensemble")
        assert exc_info.value.code == "VALIDATION_ERROR"


# ============================================================================
# MONOMIAL DISCORDANCE
# ============================================================================

class TestMonomialDiscordance:
    """Tests for the distance to the nearest permutation matrix."""

    def test_permutation_scores_zero(self):
        """Test an exact permutation matrix."""
        result = monomial_discordance([[0.0, 1.0, 0.0], [0.0, 0.0, 1.0], [1.0, 0.0, 0.0]])
        assert result.value == 0.0
        assert result.permutation == [1, 2, 0]

    def test_all_ones_scores_one(self):
        """Test the all-ones matrix is maximally discordant."""
        assert monomial_discordance(np.ones((4, 4))).value == pytest.approx(1.0)

    def test_reference_value(self):
        """Test a near-swap concordance matrix."""
        result = monomial_discordance([[0.079, 0.930], [0.853, 0.065]])
        assert result.value == pytest.approx(0.136, abs=1e-3)
        assert result.permutation == [1, 0]

    def test_transpose_symmetry(self):
        """Test D(C) = D(Cᵀ)."""
        c = np.random.default_rng(7).uniform(size=(4, 4))
        assert monomial_discordance(c.T).value == pytest.approx(monomial_discordance(c).value)

    def test_matching_agrees_with_assignment_solver(self):
        """Test the exhaustive search against the Hungarian method."""
        rng = np.random.default_rng(8)
        for _ in range(20):
            c = rng.uniform(size=(5, 5))
            _, columns = linear_sum_assignment(c, maximize=True)
            assert match_permutation(c) == columns.tolist()

    def test_ties_pick_lexicographic_smallest(self):
        """Test equally good permutations resolve to the first in order."""
        assert match_permutation(np.full((3, 3), 0.5)) == [0, 1, 2]

    def test_accepts_concordance_matrix(self, ou_ensemble):
        """Test the result of concordance_matrix is accepted directly."""
        c = concordance_matrix(ou_ensemble, ou_ensemble)
        assert monomial_discordance(c).value == pytest.approx(
            monomial_discordance(np.array(c.entries)).value
        )

    @pytest.mark.parametrize("matrix", [np.eye(11), np.ones((1, 1)), [[1.2, 0.0], [0.0, 1.0]], np.ones((2, 3))])
    def test_invalid_input(self, matrix):
        """Test dimension limits, entry range and shape."""
        with pytest.raises(AppException) as exc_info:
            monomial_discordance(matrix)
        assert exc_info.value.code == "VALIDATION_ERROR"
        assert exc_info.value.exit_code == 2

    def test_recovered_up_to_swap(self):
        """Test a monotone swap of i.i.d. sources scores close to 0."""
        values = np.random.default_rng(9).normal(size=(1, 1000, 2))
        x = PathEnsemble(np.linspace(0, 1, 1000), values)
        y = x.with_values(swap_monotone(values))
        result = monomial_discordance(concordance_matrix(x, y))
        assert result.permutation == [1, 0]
        assert result.value < 0.1
