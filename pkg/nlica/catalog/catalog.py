"""
==============================================================================
Experiment Catalog Module
==============================================================================

Bundled experiment configurations, one JSON file per experiment.

Features:
---------
- Lookup by name (file stem)
- Listing with descriptions
- Loading of user config files through the same validation path

Directory Structure:
-------------------
data/experiments/
    henon_ou.json
    mlp_ou.json
    clayton_henon.json

==============================================================================
"""

from __future__ import annotations

import logging
from pathlib import Path
from typing import Dict, List, Optional, Tuple, Union

from pydantic import ValidationError

from nlica.config import get_settings
from nlica.core.exceptions import experiment_not_found, from_validation_error
from nlica.schemas.experiment import ExperimentConfig
from nlica.utils.io import read_json


# Module logger
logger = logging.getLogger(__name__)


def load_experiment_config(path: Union[str, Path]) -> ExperimentConfig:
    """
    Read and validate an experiment config file.

    Raises:
        AppException: INPUT_NOT_FOUND, VALIDATION_ERROR naming the field
    """
    data = read_json(path)
    try:
        return ExperimentConfig.model_validate(data)
    except ValidationError as e:
        raise from_validation_error(e) from e


class ExperimentCatalog:
    """
    Catalog of bundled experiment configurations.

    Attributes:
        directory: Folder holding <name>.json files

    Example:
        >>> catalog = ExperimentCatalog(Path("data/experiments"))
        >>> catalog.names()
        ['clayton_henon', 'henon_ou', 'mlp_ou']
        >>> config = catalog.get("henon_ou")
    """

    def __init__(self, directory: Path) -> None:
        self._directory = Path(directory)
        self._files: Dict[str, Path] = {}
        self._load()

    @property
    def directory(self) -> Path:
        return self._directory

    def _load(self) -> None:
        self._files.clear()
        if not self._directory.is_dir():
            logger.warning(f"⚠️ Experiment directory not found: {self._directory}")
            return
        for path in sorted(self._directory.glob("*.json")):
            self._files[path.stem] = path
        logger.debug(f"Found {len(self._files)} bundled experiments in {self._directory}")

    def reload(self) -> None:
        """Rescan the directory."""
        self._load()

    def names(self) -> List[str]:
        return sorted(self._files)

    def path(self, name: str) -> Path:
        if name not in self._files:
            raise experiment_not_found(name)
        return self._files[name]

    def get(self, name: str) -> ExperimentConfig:
        """
        Validated config of a bundled experiment.

        Raises:
            AppException: EXPERIMENT_NOT_FOUND, VALIDATION_ERROR
        """
        return load_experiment_config(self.path(name))

    def describe(self) -> List[Tuple[str, str]]:
        """(name, description) for every bundled experiment."""
        return [(name, self.get(name).description) for name in self.names()]


# =============================================================================
# SINGLETON INSTANCE MANAGEMENT
# =============================================================================

_catalog_instance: Optional[ExperimentCatalog] = None


def _default_directory() -> Path:
    configured = get_settings().experiments_path
    if configured.is_dir():
        return configured
    # Fall back to the copy shipped next to the package
    return Path(__file__).resolve().parents[2] / "data" / "experiments"


def init_catalog(directory: Optional[Path] = None) -> ExperimentCatalog:
    """
    Initialize the global catalog instance.

    Args:
        directory: Experiment folder (uses settings if None)
    """
    global _catalog_instance
    _catalog_instance = ExperimentCatalog(directory or _default_directory())
    return _catalog_instance


def get_catalog() -> ExperimentCatalog:
    """Get the global catalog instance, creating it on first use."""
    return _catalog_instance or init_catalog()
