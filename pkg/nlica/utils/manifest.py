"""
==============================================================================
Run Manifest Module
==============================================================================

Reproducibility record of an experiment run.

This module implements:
- RunManifestWriter: per-stage timing, artifact registration and the final
  manifest with its content hash

The manifest hash covers every field except the stage timings and the hash
itself, so reruns of the same configuration produce the same hash.

File Format:
-----------
manifest.json
{
  "name": ..., "config_hash": sha256, "seed": int,
  "versions": {...}, "stage_timings_ms": {...},
  "artifact_paths": {...}, "artifact_hashes": {...},
  "manifest_hash": sha256
}

==============================================================================
"""

from __future__ import annotations

import hashlib
import json
import logging
import platform
import time
from contextlib import contextmanager
from pathlib import Path
from typing import Dict, Iterator, Union

import numpy as np
import pydantic
import scipy

from nlica import __version__
from nlica.core.exceptions import AppException, internal_error
from nlica.schemas.results import RunManifest

from .io import to_jsonable, write_json


# Module logger
logger = logging.getLogger(__name__)


def sha256_bytes(data: bytes) -> str:
    return hashlib.sha256(data).hexdigest()


def sha256_file(path: Union[str, Path]) -> str:
    """Hex digest of a file's bytes."""
    digest = hashlib.sha256()
    with Path(path).open("rb") as f:
        for block in iter(lambda: f.read(1 << 16), b""):
            digest.update(block)
    return digest.hexdigest()


def canonical_hash(payload) -> str:
    """Hex digest of the canonical compact JSON form of a payload."""
    text = json.dumps(to_jsonable(payload), sort_keys=True, separators=(",", ":"))
    return sha256_bytes(text.encode("utf-8"))


def library_versions() -> Dict[str, str]:
    """Versions of the interpreter and the numerical stack."""
    return {
        "nlica": __version__,
        "python": platform.python_version(),
        "numpy": np.__version__,
        "scipy": scipy.__version__,
        "pydantic": pydantic.VERSION,
    }


class RunManifestWriter:
    """
    Collects timings and artifacts while a run progresses.

    Attributes:
        directory: Run output directory; artifact paths are stored relative
            to it

    Example:
        >>> writer = RunManifestWriter(Path("storage/runs/henon_ou"))
        >>> with writer.stage("simulate"):
        ...     sources = simulate(spec)
        >>> writer.add_artifact("sources", writer.directory / "sources.csv")
        >>> manifest = writer.write("henon_ou", config, seed=7)
    """

    def __init__(self, directory: Path) -> None:
        self.directory = Path(directory)
        self._timings: Dict[str, float] = {}
        self._artifacts: Dict[str, Path] = {}

    @contextmanager
    def stage(self, name: str) -> Iterator[None]:
        """
        Time a pipeline stage and tag escaping errors with its name.

        Raises:
            AppException: the stage's own error with details["stage"] set;
                unexpected exceptions become INTERNAL_ERROR
        """
        logger.info(f"🚀 Stage {name}")
        started = time.perf_counter()
        try:
            yield
        except AppException as exc:
            logger.error(f"❌ Stage {name} failed: {exc.code}")
            raise exc.with_stage(name)
        except Exception as exc:
            logger.exception(f"❌ Stage {name} failed unexpectedly")
            raise internal_error(f"{type(exc).__name__}: {exc}").with_stage(name) from exc
        finally:
            self._timings[name] = round((time.perf_counter() - started) * 1000.0, 3)
        logger.info(f"✅ Stage {name} done in {self._timings[name]:.1f} ms")

    def add_artifact(self, key: str, path: Path) -> None:
        self._artifacts[key] = Path(path)

    def build(self, name: str, config, seed: int) -> RunManifest:
        """Manifest with artifact hashes and the content hash filled in."""
        paths = {
            key: path.relative_to(self.directory).as_posix()
            if path.is_relative_to(self.directory) else path.as_posix()
            for key, path in sorted(self._artifacts.items())
        }
        hashes = {key: sha256_file(path) for key, path in sorted(self._artifacts.items())}
        manifest = RunManifest(
            name=name,
            config_hash=canonical_hash(config),
            seed=seed,
            versions=library_versions(),
            stage_timings_ms=dict(self._timings),
            artifact_paths=paths,
            artifact_hashes=hashes,
        )
        hashed = manifest.model_dump(mode="json", exclude={"stage_timings_ms", "manifest_hash"})
        return manifest.model_copy(update={"manifest_hash": canonical_hash(hashed)})

    def write(self, name: str, config, seed: int) -> RunManifest:
        """Build the manifest and write it as manifest.json."""
        manifest = self.build(name, config, seed)
        write_json(manifest, self.directory / "manifest.json")
        logger.info(f"✅ Manifest {manifest.manifest_hash[:12]} written to {self.directory}")
        return manifest
