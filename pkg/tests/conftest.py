"""
==============================================================================
Pytest Configuration and Fixtures
==============================================================================

Provides settings isolation, exact-enumeration laws and small simulated
ensembles shared by the test modules.

Tests marked `slow` run only with --runslow.

==============================================================================
"""

from pathlib import Path

import numpy as np
import pytest

from nlica.config import get_settings
from nlica.schemas.source import SourceSpec
from nlica.signatures.paths import PathEnsemble
from nlica.sources.simulators import simulate


# ============================================================================
# COMMAND LINE OPTIONS
# ============================================================================

def pytest_addoption(parser):
    parser.addoption("--runslow", action="store_true", default=False, help="run slow tests")


def pytest_configure(config):
    config.addinivalue_line("markers", "slow: long-running end-to-end test")


def pytest_collection_modifyitems(config, items):
    if config.getoption("--runslow"):
        return
    skip_slow = pytest.mark.skip(reason="needs --runslow")
    for item in items:
        if "slow" in item.keywords:
            item.add_marker(skip_slow)


# ============================================================================
# SETTINGS FIXTURES
# ============================================================================

@pytest.fixture(autouse=True)
def isolated_settings(tmp_path: Path, monkeypatch: pytest.MonkeyPatch):
    """Fresh settings per test, writing runs under a temporary directory."""
    monkeypatch.setenv("OUTPUT_DIRECTORY", str(tmp_path / "runs"))
    monkeypatch.delenv("THREADS", raising=False)
    get_settings.cache_clear()
    yield
    get_settings.cache_clear()


# ============================================================================
# EXACT-ENUMERATION FIXTURES
# ============================================================================

def linear_atoms(increments, weights) -> PathEnsemble:
    """One straight segment per atom, started at the origin."""
    increments = np.asarray(increments, dtype=float)
    values = np.stack([np.zeros_like(increments), increments], axis=1)
    return PathEnsemble(np.array([0.0, 1.0]), values, weights=np.asarray(weights, dtype=float))


@pytest.fixture
def product_atoms() -> PathEnsemble:
    """Four equiprobable linear paths with increments in {±1}×{±1}."""
    increments = [[1, 1], [1, -1], [-1, 1], [-1, -1]]
    return linear_atoms(increments, [0.25] * 4)


@pytest.fixture
def coupled_atoms() -> PathEnsemble:
    """Two equiprobable linear paths with increments (+1, +1) and (-1, -1)."""
    return linear_atoms([[1, 1], [-1, -1]], [0.5, 0.5])


# ============================================================================
# SIMULATION FIXTURES
# ============================================================================

@pytest.fixture
def ou_spec() -> SourceSpec:
    """Small two-dimensional OU spec with distinct mean-reversion rates."""
    return SourceSpec(
        kind="ou",
        d=2,
        n_paths=64,
        n_steps=50,
        seed=7,
        params={"theta": [1.0, 3.0], "sigma": [1.0]},
    )


@pytest.fixture
def ou_ensemble(ou_spec: SourceSpec) -> PathEnsemble:
    """Ensemble simulated from ou_spec."""
    return simulate(ou_spec, threads=1)


@pytest.fixture
def random_path_values() -> np.ndarray:
    """Twenty-segment random walk in R^3."""
    rng = np.random.default_rng(2024)
    steps = rng.normal(scale=0.3, size=(20, 3))
    return np.vstack([np.zeros(3), np.cumsum(steps, axis=0)])
