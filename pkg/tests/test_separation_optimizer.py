"""
==============================================================================
Separation Optimizer Tests
==============================================================================

Objective evaluation, grid search, Nelder-Mead and Adam on finite
differences.

==============================================================================
"""

import numpy as np
import pytest

from nlica.catalog.catalog import get_catalog
from nlica.core.exceptions import AppException
from nlica.mixing import apply_map, build_map
from nlica.optimization import FunctionObjective, Objective, grid_search, nelder_mead, sgd_fd
from nlica.schemas.mixing import MapSpec
from nlica.schemas.optimizer import GridOptions, NelderMeadOptions, OptimizerMethod, SGDOptions
from nlica.services.experiment_service import ExperimentService
from nlica.signatures import PathEnsemble, contrast_ic

TARGET = np.array([1.0, -2.0])


def quadratic(theta: np.ndarray) -> float:
    return float(np.sum((theta - TARGET) ** 2))


@pytest.fixture
def quadratic_objective() -> FunctionObjective:
    return FunctionObjective(quadratic)


@pytest.fixture
def henon_mixture(product_atoms):
    """Exact four-atom product law pushed through a rotated Hénon map."""
    mixer = build_map(MapSpec(family="henon", params=[1.4, 0.3], options={"rotation": 45}))
    return apply_map(mixer, product_atoms.with_values(product_atoms.values * 0.5))


def henon_candidate(params) -> MapSpec:
    return MapSpec(family="henon", params=list(params), options={"rotation": 45}, inverse=True)


# ============================================================================
# OBJECTIVE
# ============================================================================

class TestObjective:
    """Tests for the separation objective."""

    def test_identity_candidate(self, ou_ensemble):
        """Test the identity candidate reproduces contrast_ic."""
        objective = Objective(ou_ensemble, MapSpec(family="identity"), depth=4, mu=4)
        assert objective([]) == contrast_ic(ou_ensemble, depth=4, mu=4).contrast

    def test_true_inverse_is_minimal(self, henon_mixture):
        """Test the true inverse beats every perturbation of size 0.1 or more."""
        objective = Objective(henon_mixture, henon_candidate([1.4, 0.3]), depth=4, mu=4)
        at_truth = objective([1.4, 0.3])
        assert at_truth < 1e-10
        for delta in ([0.1, 0.0], [-0.2, 0.0], [0.0, 0.1], [0.3, -0.1]):
            assert at_truth <= objective(np.array([1.4, 0.3]) + delta)

    def test_degenerate_parameters_penalized(self, henon_mixture):
        """Test an inadmissible θ returns the penalty with a reason."""
        objective = Objective(henon_mixture, henon_candidate([1.4, 0.3]), depth=3, mu=3, penalty=1e6)
        result = objective.evaluate([1.4, 0.0])
        assert result.penalized
        assert result.value == 1e6
        assert result.reason == "DEGENERATE_PARAMETERS"

    def test_domain_violation_penalized(self):
        """Test undefined nodes are penalized instead of raised."""
        values = np.zeros((3, 2, 2))
        values[:, 1] = [[1.0, 0.5], [-1.0, 0.2], [0.3, -0.7]]
        ensemble = PathEnsemble(np.array([0.0, 1.0]), values)
        reciprocal = MapSpec(family="moebius", params=[0, 0, 1, 0, 1, 0, 0, 0])
        result = Objective(ensemble, reciprocal, depth=2, mu=2).evaluate(reciprocal.params)
        assert result.penalized
        assert result.reason == "DOMAIN_VIOLATION"

    def test_mu_exceeds_depth(self, ou_ensemble):
        """Test construction checks mu against depth."""
        with pytest.raises(AppException) as exc_info:
            Objective(ou_ensemble, MapSpec(family="identity"), depth=3, mu=5)
        assert exc_info.value.code == "MU_EXCEEDS_DEPTH"

    def test_path_order_invariance(self, ou_ensemble):
        """Test the objective ignores path order."""
        candidate = henon_candidate([1.4, 0.3])
        order = np.random.default_rng(8).permutation(ou_ensemble.n_paths)
        a = Objective(ou_ensemble, candidate, depth=4, mu=4)([1.2, 0.35])
        b = Objective(ou_ensemble.subset(order), candidate, depth=4, mu=4)([1.2, 0.35])
        assert a == b

    def test_free_parameters(self, henon_mixture):
        """Test θ fills only the free parameter indices."""
        candidate = henon_candidate([1.4, 0.3]).model_copy(update={"free": [0]})
        objective = Objective(henon_mixture, candidate, depth=3, mu=3)
        assert objective.n_params == 1
        assert objective.map_for([1.0]).params == (1.0, 0.3)


# ============================================================================
# GRID SEARCH
# ============================================================================

class TestGridSearch:
    """Tests for exhaustive lattice search."""

    def test_single_point(self, quadratic_objective):
        """Test a one-point lattice returns that point."""
        result = grid_search(quadratic_objective, GridOptions(axes=["0.5:0.5:1", "3:3:1"]))
        assert result.report.best_theta == [0.5, 3.0]
        assert result.values.shape == (1, 1)

    def test_quadratic_vertex(self):
        """Test the argmin is the lattice point nearest the vertex."""
        objective = FunctionObjective(lambda t: float((t[0] - 0.33) ** 2 + (t[1] - 0.72) ** 2))
        result = grid_search(objective, GridOptions(axes=["0:1:11", "0:1:11"]))
        assert result.report.best_theta == pytest.approx([0.3, 0.7])
        assert result.report.evaluations == 121
        assert len(result.report.trajectory) == 121

    def test_thread_count_invariance(self, henon_mixture):
        """Test the lattice values do not depend on the worker count."""
        objective = Objective(henon_mixture, henon_candidate([1.4, 0.3]), depth=3, mu=3)
        options = GridOptions(axes=["1.2:1.6:3", "0.2:0.4:3"])
        serial = grid_search(objective, options, threads=1)
        parallel = grid_search(objective, options, threads=4)
        assert np.array_equal(serial.values, parallel.values)

    def test_grid_finds_true_inverse(self, henon_mixture):
        """Test the lattice argmin sits on the true parameters."""
        objective = Objective(henon_mixture, henon_candidate([1.4, 0.3]), depth=4, mu=4)
        result = grid_search(objective, GridOptions(axes=["1.0:1.8:5", "0.1:0.5:5"]))
        assert result.report.best_theta == pytest.approx([1.4, 0.3])


# ============================================================================
# NELDER-MEAD
# ============================================================================

class TestNelderMead:
    """Tests for simplex search."""

    def test_quadratic(self, quadratic_objective):
        """Test convergence to the vertex of |θ - c|²."""
        report = nelder_mead(quadratic_objective, [0.0, 0.0], NelderMeadOptions(max_evals=1000))
        assert np.max(np.abs(np.array(report.best_theta) - TARGET)) < 1e-4
        assert report.status == "converged"

    def test_zero_budget(self, quadratic_objective):
        """Test max_evals 0 returns θ0."""
        report = nelder_mead(quadratic_objective, [0.3, 0.4], NelderMeadOptions(max_evals=0))
        assert report.best_theta == [0.3, 0.4]
        assert report.evaluations == 1

    def test_non_finite_start(self):
        """Test a non-finite objective at θ0 is an error."""
        objective = FunctionObjective(lambda t: float("nan"))
        with pytest.raises(AppException) as exc_info:
            nelder_mead(objective, [0.0])
        assert exc_info.value.code == "NON_FINITE_OBJECTIVE"

    def test_too_many_parameters(self, quadratic_objective):
        """Test the simplex is limited to 20 parameters."""
        with pytest.raises(AppException):
            nelder_mead(quadratic_objective, [0.0] * 21)

    def test_best_value_is_trajectory_minimum(self, quadratic_objective):
        """Test the reported best is the smallest recorded value."""
        report = nelder_mead(quadratic_objective, [3.0, 3.0], NelderMeadOptions(max_evals=30))
        assert report.best_value == min(p.value for p in report.trajectory)


# ============================================================================
# ADAM ON FINITE DIFFERENCES
# ============================================================================

class TestSgdFd:
    """Tests for Adam on finite-difference gradients."""

    def test_quadratic(self, quadratic_objective):
        """Test convergence on the quadratic toy problem."""
        options = SGDOptions(lr=0.01, iterations=1000, l2=0.0)
        report = sgd_fd(quadratic_objective, TARGET + [0.3, -0.2], options)
        assert np.max(np.abs(np.array(report.best_theta) - TARGET)) < 1e-3

    def test_zero_learning_rate(self, quadratic_objective):
        """Test lr = 0 leaves θ unchanged."""
        report = sgd_fd(quadratic_objective, [0.5, 0.5], SGDOptions(lr=0.0, iterations=20))
        assert report.final_theta == [0.5, 0.5]
        assert len(report.trajectory) == 21

    def test_divergence(self):
        """Test values above the divergence threshold stop the run."""
        objective = FunctionObjective(lambda t: float(np.exp(50.0 * t[0])))
        report = sgd_fd(objective, [1.0], SGDOptions(lr=0.1, iterations=50))
        assert report.status == "diverged"
        assert len(report.trajectory) == 1

    def test_reproducible(self, ou_ensemble):
        """Test the same seed gives the same trajectory for any worker count."""
        objective = Objective(ou_ensemble, henon_candidate([1.4, 0.3]), depth=3, mu=3)
        options = SGDOptions(lr=0.01, iterations=3, batch_paths=16)
        first = sgd_fd(objective, [1.3, 0.25], options, seed=5, threads=1)
        second = sgd_fd(objective, [1.3, 0.25], options, seed=5, threads=4)
        assert first.model_dump() == second.model_dump()

    def test_non_finite_start(self, quadratic_objective):
        """Test θ0 must be finite."""
        with pytest.raises(AppException) as exc_info:
            sgd_fd(quadratic_objective, [float("inf"), 0.0])
        assert exc_info.value.code == "VALIDATION_ERROR"


# ============================================================================
# MLP SEPARATION
# ============================================================================

class TestMlpSeparation:
    """Tests for an MLP demixer trained on a Hénon-mixed OU ensemble."""

    @pytest.mark.slow
    def test_bundled_mlp_experiment_separates(self, tmp_path):
        """Test the trained MLP gives a dominant-permutation concordance pattern."""
        config = get_catalog().get("mlp_ou")
        assert config.candidate.family == "mlp"
        assert config.optimizer.method == OptimizerMethod.SGD

        outcome = ExperimentService(config, output_directory=tmp_path / "mlp_ou", threads=1).run()
        for row in outcome.concordance.entries:
            largest, second = sorted(row, reverse=True)[:2]
            assert largest > 2.0 * second
        assert outcome.discordance.value < 0.3
