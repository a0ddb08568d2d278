"""
==============================================================================
Source Model Tests
==============================================================================

Simulators, covariance kernels, copulas and temporal-structure diagnostics.

==============================================================================
"""

import numpy as np
import pytest
from pydantic import ValidationError
from scipy import integrate, stats

from nlica.core.exceptions import AppException
from nlica.metrics import kendall_tau
from nlica.schemas.source import SourceSpec
from nlica.sources import (
    SeparabilityClass,
    cholesky_factor,
    conditional_copula_cdf,
    conditional_copula_inverse,
    copula_density,
    covariance_kernel,
    covariance_matrix,
    diagonal_flat_density_grid,
    gamma_contrastivity_check,
    gaussian_density_grid,
    kendall_tau_population,
    mixed_log_derivative,
    separability_classify,
    simulate,
)
from nlica.sources.diagnostics import BivariateDensityGrid


# ============================================================================
# SIMULATORS
# ============================================================================

class TestSimulate:
    """Tests for the source simulators."""

    def test_shape(self, ou_spec):
        """Test the ensemble shape follows the spec."""
        ensemble = simulate(ou_spec)
        assert ensemble.values.shape == (64, 51, 2)
        assert ensemble.label == "ou"

    def test_deterministic(self, ou_spec):
        """Test the same seed reproduces the same draws."""
        assert np.array_equal(simulate(ou_spec).values, simulate(ou_spec).values)

    def test_thread_count_invariance(self, ou_spec):
        """Test the output does not depend on the worker count."""
        assert np.array_equal(simulate(ou_spec, threads=1).values, simulate(ou_spec, threads=3).values)

    def test_seed_changes_draws(self, ou_spec):
        """Test a different seed gives different paths."""
        other = ou_spec.model_copy(update={"seed": 8})
        assert not np.array_equal(simulate(ou_spec).values, simulate(other).values)

    def test_ou_noiseless_limit(self):
        """Test a vanishing noise level follows the deterministic decay."""
        spec = SourceSpec(
            kind="ou", d=1, n_paths=4, n_steps=100, seed=1, stationary_start=False,
            params={"theta": [2.0], "sigma": [1e-12], "a": [1.0]},
        )
        ensemble = simulate(spec)
        expected = np.exp(-2.0 * spec.times)
        assert np.max(np.abs(ensemble.values[:, :, 0] - expected)) < 1e-9

    def test_fbm_pinned_at_zero(self):
        """Test fractional Brownian motion starts at the origin."""
        spec = SourceSpec(kind="fbm", d=2, n_paths=8, n_steps=20, seed=3, params={"hurst": [0.3, 0.7]})
        ensemble = simulate(spec)
        assert np.all(ensemble.values[:, 0, :] == 0.0)

    def test_gbm_positive(self):
        """Test geometric Brownian motion stays positive."""
        spec = SourceSpec(kind="gbm", d=2, n_paths=16, n_steps=50, seed=4,
                          params={"s0": [1.0], "sigma": [0.2, 0.4], "sigma_slope": [0.1]})
        assert np.all(simulate(spec).values > 0)

    def test_white_noise_start(self):
        """Test white noise with drift starts at its start value."""
        spec = SourceSpec(kind="white_noise_drift", d=2, n_paths=4, n_steps=10, seed=5,
                          params={"start": [1.5], "drift": [0.5, -0.5]})
        assert np.all(simulate(spec).values[:, 0, :] == 1.5)

    def test_missing_required_parameter(self):
        """Test OU without theta fails validation."""
        with pytest.raises(ValidationError):
            SourceSpec(kind="ou", d=2, n_paths=4, n_steps=10, seed=0, params={"sigma": [1.0]})

    def test_copula_needs_family(self):
        """Test the copula chain requires its family."""
        with pytest.raises(ValidationError):
            SourceSpec(kind="copula_markov", d=1, n_paths=4, n_steps=10, seed=0, params={"theta": [2.0]})

    def test_coordinates_are_unranked(self):
        """Test distinct coordinates have |Kendall τ| below 3/√N at matched times."""
        spec = SourceSpec(kind="ou", d=3, n_paths=400, n_steps=50, seed=13,
                          params={"theta": [1.0, 2.0, 4.0], "sigma": [1.0]})
        values = simulate(spec).values
        bound = 3.0 / np.sqrt(spec.n_paths)
        for t in (0, 10, 25, 50):
            for i, j in ((0, 1), (0, 2), (1, 2)):
                assert abs(kendall_tau(values[:, t, i], values[:, t, j])) < bound

    @pytest.mark.parametrize("spec", [
        SourceSpec(kind="gp_gamma_exp", d=1, n_paths=10_000, n_steps=8, seed=17,
                   params={"gamma": [1.0], "alpha": [0.5], "mean": [0.3]}),
        SourceSpec(kind="fbm", d=1, n_paths=10_000, n_steps=8, seed=19, params={"hurst": [0.3]}),
    ], ids=["gp", "fbm"])
    def test_empirical_moments_match_kernel(self, spec):
        """Test sample mean and covariance lie within 5 standard errors of the closed forms."""
        values = simulate(spec).values[:, :, 0]
        kernel = covariance_matrix(spec, 0, spec.times)
        variance = np.diag(kernel)
        n = spec.n_paths

        mean = spec.coordinate_params(0).get("mean", 0.0)
        assert np.all(np.abs(values.mean(axis=0) - mean) <= 5.0 * np.sqrt(variance / n) + 1e-12)

        sample = np.cov(values, rowvar=False)
        standard_error = np.sqrt((np.outer(variance, variance) + kernel ** 2) / n)
        assert np.all(np.abs(sample - kernel) <= 5.0 * standard_error + 1e-12)

    @pytest.mark.slow
    def test_ou_stationary_covariance(self):
        """Test the sample covariance of a stationary OU matches e^{-θτ}."""
        spec = SourceSpec(kind="ou", d=1, n_paths=10_000, n_steps=10, seed=6,
                          params={"theta": [1.0], "sigma": [np.sqrt(2.0)]})
        values = simulate(spec).values[:, :, 0]
        for lag in (0, 2, 5):
            sample = np.mean(values[:, 0] * values[:, lag]) - np.mean(values[:, 0]) * np.mean(values[:, lag])
            assert sample == pytest.approx(np.exp(-spec.times[lag]), abs=0.05)


class TestCholesky:
    """Tests for the jittered Cholesky factorization."""

    def test_factor(self):
        """Test the factor reproduces the covariance."""
        covariance = np.array([[2.0, 0.5], [0.5, 1.0]])
        factor = cholesky_factor(covariance, "gp_gamma_exp", 0)
        assert np.allclose(factor @ factor.T, covariance)

    def test_indefinite(self):
        """Test an indefinite matrix fails after jitter."""
        with pytest.raises(AppException) as exc_info:
            cholesky_factor(np.array([[1.0, 2.0], [2.0, 1.0]]), "gp_gamma_exp", 0)
        assert exc_info.value.code == "NOT_POSITIVE_DEFINITE"
        assert exc_info.value.exit_code == 1


# ============================================================================
# KERNELS
# ============================================================================

class TestKernels:
    """Tests for closed-form covariance functions."""

    def test_fbm_variance(self):
        """Test Var B^H_t = t^{2H}."""
        spec = SourceSpec(kind="fbm", d=1, n_paths=1, n_steps=1, seed=0, params={"hurst": [0.3]})
        kernel = covariance_kernel(spec, 0)
        assert float(kernel(np.array(0.5), np.array(0.5))) == pytest.approx(0.5 ** 0.6)

    def test_ou_fixed_start(self):
        """Test the OU kernel started from a fixed value vanishes at time 0."""
        spec = SourceSpec(kind="ou", d=1, n_paths=1, n_steps=1, seed=0, stationary_start=False,
                          params={"theta": [1.0], "sigma": [1.0]})
        kernel = covariance_kernel(spec, 0)
        assert float(kernel(np.array(0.0), np.array(0.7))) == 0.0

    def test_copula_kernel_unsupported(self):
        """Test the copula chain has no covariance kernel."""
        spec = SourceSpec(kind="copula_markov", d=1, n_paths=1, n_steps=1, seed=0,
                          copula_family="clayton", params={"theta": [2.0]})
        with pytest.raises(AppException) as exc_info:
            covariance_kernel(spec, 0)
        assert exc_info.value.code == "UNSUPPORTED_KIND"


# ============================================================================
# COPULAS
# ============================================================================

class TestCopulas:
    """Tests for copula densities, conditionals and samplers."""

    def test_gumbel_flat_line(self):
        """Test the (1-2x) factor vanishes at x = 1/2."""
        values = copula_density("gumbel", 0.5, 0.5, np.array([0.1, 0.5, 0.9]))
        assert np.allclose(values, 1.0)

    def test_clayton_value(self):
        """Test the Clayton density at the centre."""
        assert copula_density("clayton", 2.0, 0.5, 0.5) == pytest.approx(192.0 * 7.0 ** -2.5)

    def test_frank_normalized(self):
        """Test the Frank density integrates to 1."""
        total, _ = integrate.dblquad(
            lambda y, x: copula_density("frank", 1.0, x, y), 0.0, 1.0, 0.0, 1.0, epsabs=1e-10
        )
        assert total == pytest.approx(1.0, abs=1e-6)

    def test_unknown_family(self):
        """Test an unknown family name."""
        with pytest.raises(AppException) as exc_info:
            copula_density("joe", 2.0, 0.5, 0.5)
        assert exc_info.value.code == "UNKNOWN_FAMILY"

    def test_theta_outside_domain(self):
        """Test θ = 0 is rejected for Clayton."""
        with pytest.raises(AppException) as exc_info:
            copula_density("clayton", 0.0, 0.5, 0.5)
        assert exc_info.value.code == "DEGENERATE_PARAMETERS"

    @pytest.mark.parametrize("family,theta", [("clayton", 2.0), ("gumbel", -0.7), ("frank", 4.0)])
    def test_conditional_inverse(self, family, theta):
        """Test h(h^{-1}(w | u) | u) = w."""
        u = np.array([0.1, 0.4, 0.8])
        w = np.array([0.3, 0.6, 0.95])
        v = conditional_copula_inverse(family, theta, u, w)
        assert np.allclose(conditional_copula_cdf(family, theta, u, v), w, atol=1e-9)

    def test_population_tau_clayton(self):
        """Test the quadrature tau of Clayton(2) equals θ/(θ+2)."""
        assert kendall_tau_population("clayton", 2.0) == pytest.approx(0.5, abs=1e-6)

    def test_clayton_chain(self):
        """Test consecutive Clayton chain states carry the population tau."""
        spec = SourceSpec(kind="copula_markov", d=1, n_paths=5000, n_steps=1, seed=9,
                          copula_family="clayton", params={"theta": [2.0]})
        values = simulate(spec).values[:, :, 0]
        target = kendall_tau_population("clayton", 2.0)
        assert kendall_tau(values[:, 0], values[:, 1]) == pytest.approx(target, abs=0.05)
        assert stats.kstest(values[:, 1], "norm").pvalue > 0.01


# ============================================================================
# DIAGNOSTICS
# ============================================================================

class TestSeparability:
    """Tests for mixed log-derivatives and the separability classes."""

    grid = np.linspace(-2.0, 2.0, 41)

    def test_separable_product(self):
        """Test a product density has vanishing mixed log-derivative."""
        x = y = self.grid
        values = np.outer(np.exp(-x ** 2), 1.0 + y ** 2)
        density = BivariateDensityGrid(x, y, values)
        assert np.max(np.abs(mixed_log_derivative(density))) < 1e-6
        assert separability_classify(density) == SeparabilityClass.SEPARABLE

    def test_gaussian_constant(self):
        """Test the correlated Gaussian gives ρ/(1-ρ²) everywhere."""
        xi = mixed_log_derivative(gaussian_density_grid(0.5, self.grid, self.grid))
        assert np.max(np.abs(xi / (2.0 / 3.0) - 1.0)) < 1e-4

    def test_gaussian_classes(self):
        """Test independent and correlated Gaussians are told apart."""
        product = gaussian_density_grid(0.0, self.grid, self.grid)
        correlated = gaussian_density_grid(0.5, self.grid, self.grid)
        assert separability_classify(product) == SeparabilityClass.SEPARABLE
        assert separability_classify(correlated) == SeparabilityClass.REGULARLY_NON_SEPARABLE

    def test_diagonal_flat(self):
        """Test a density whose mixed log-derivative vanishes only near the diagonal."""
        axis = np.linspace(0.05, 0.95, 19)
        density = diagonal_flat_density_grid(axis, axis)
        xi = mixed_log_derivative(density)
        assert np.all(np.abs(np.diagonal(xi)) < 1e-12)
        assert np.max(np.abs(xi)) > 1e-3
        assert separability_classify(density) == SeparabilityClass.NON_SEPARABLE_DIAG_VANISHING

    def test_non_positive_density(self):
        """Test zeros in the density are rejected."""
        density = BivariateDensityGrid(self.grid[:3], self.grid[:3], np.zeros((3, 3)))
        with pytest.raises(AppException) as exc_info:
            mixed_log_derivative(density)
        assert exc_info.value.code == "DOMAIN_VIOLATION"


class TestContrastivity:
    """Tests for the covariance-ratio witness search."""

    def test_fbm_ratios(self):
        """Test Ξ_i = (t0/t1)^{2H_i} for fractional Brownian motion."""
        spec = SourceSpec(kind="fbm", d=2, n_paths=1, n_steps=1, seed=0, params={"hurst": [0.3, 0.7]})
        report = gamma_contrastivity_check(spec, [(0.1, 0.2), (0.2, 0.4)])
        assert report.satisfied
        assert report.xi_vector == pytest.approx([0.5 ** 0.6, 0.5 ** 1.4], abs=1e-10)

    def test_identical_ou(self):
        """Test identical OU coordinates never separate."""
        spec = SourceSpec(kind="ou", d=2, n_paths=1, n_steps=1, seed=0,
                          params={"theta": [1.0], "sigma": [1.0]})
        assert not gamma_contrastivity_check(spec).satisfied

    def test_distinct_ou(self):
        """Test distinct mean-reversion rates separate."""
        spec = SourceSpec(kind="ou", d=2, n_paths=1, n_steps=1, seed=0, stationary_start=False,
                          params={"theta": [1.0, 2.0], "sigma": [1.0]})
        report = gamma_contrastivity_check(spec)
        assert report.satisfied
        assert report.pairs[0] == report.pairs[2]

    def test_copula_unsupported(self):
        """Test the copula chain has no closed-form ratios."""
        spec = SourceSpec(kind="copula_markov", d=2, n_paths=1, n_steps=1, seed=0,
                          copula_family="frank", params={"theta": [1.0]})
        with pytest.raises(AppException) as exc_info:
            gamma_contrastivity_check(spec)
        assert exc_info.value.code == "UNSUPPORTED_KIND"
