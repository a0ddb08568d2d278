"""
==============================================================================
Command-Line Tests
==============================================================================

Exit codes, determinism and the bundled experiments, driven through
nlica.main.main exactly as the console script calls it.

==============================================================================
"""

import csv
import json
from pathlib import Path

import numpy as np
import pytest

from nlica.main import main


def simulate(path: Path, seed: int = 42, paths: int = 16, steps: int = 50) -> int:
    return main([
        "simulate", "--model", "ou", "--d", "2", "--steps", str(steps),
        "--paths", str(paths), "--seed", str(seed), "-o", str(path),
    ])


def read_grid(path: Path, column: str):
    with path.open(encoding="utf-8") as f:
        rows = list(csv.DictReader(f))
    points = np.array([[float(r["theta1"]), float(r["theta2"])] for r in rows])
    return points, np.array([float(r[column]) for r in rows])


def lattice_index(points: np.ndarray, row: int):
    return tuple(int(np.searchsorted(np.unique(points[:, k]), points[row, k])) for k in range(2))


def stdout_json(capsys) -> dict:
    return json.loads(capsys.readouterr().out)


@pytest.fixture
def balanced_csv(tmp_path) -> Path:
    """Four paths whose coordinates have Kendall's tau exactly 0 at every time."""
    x1, x2 = [1.0, 2.0, 3.0, 4.0], [2.0, 4.0, 1.0, 3.0]
    lines = ["path_id,t,x1,x2"]
    for p in range(4):
        for t in (0.0, 0.5, 1.0):
            lines.append(f"{p},{t!r},{x1[p] * (1 + t)!r},{x2[p] - t!r}")
    path = tmp_path / "balanced.csv"
    path.write_text("\n".join(lines) + "\n", encoding="utf-8")
    return path


# ============================================================================
# SIMULATE, MIX, CONTRAST, EVALUATE
# ============================================================================

class TestPipelineCommands:
    """Tests for the single-stage subcommands."""

    def test_simulate_is_deterministic(self, tmp_path):
        """Test two runs with the same seed write byte-identical CSV."""
        first, second = tmp_path / "a.csv", tmp_path / "b.csv"
        assert simulate(first) == 0
        assert simulate(second) == 0
        assert first.read_bytes() == second.read_bytes()

    def test_simulate_header(self, tmp_path):
        """Test the ensemble CSV header."""
        path = tmp_path / "s.csv"
        simulate(path)
        assert path.read_text(encoding="utf-8").splitlines()[0] == "path_id,t,x1,x2"

    def test_simulate_to_stdout(self, tmp_path, capsys):
        """Test omitting -o streams the same CSV to stdout."""
        path = tmp_path / "s.csv"
        simulate(path)
        capsys.readouterr()
        code = main(["simulate", "--model", "ou", "--d", "2", "--steps", "50", "--paths", "16", "--seed", "42"])
        assert code == 0
        assert capsys.readouterr().out == path.read_text(encoding="utf-8")

    def test_fixed_start(self, tmp_path, capsys):
        """Test --fixed-start pins every OU path to the start value a."""
        path = tmp_path / "s.csv"
        assert main(["simulate", "--model", "ou", "--d", "2", "--steps", "5", "--paths", "4", "--seed", "1",
                     "--fixed-start", "--param", "a=0.5", "-o", str(path)]) == 0
        with path.open(encoding="utf-8") as f:
            first = [row for row in csv.DictReader(f) if float(row["t"]) == 0.0]
        assert len(first) == 4
        assert all(float(row["x1"]) == 0.5 and float(row["x2"]) == 0.5 for row in first)

        assert main(["simulate", "--help"]) == 0
        help_text = " ".join(capsys.readouterr().out.split())
        assert "instead of drawing the start from the stationary law" in help_text

    def test_simulate_requires_seed(self, tmp_path, capsys):
        """Test a missing seed is a validation failure."""
        code = main(["simulate", "--model", "ou", "-o", str(tmp_path / "s.csv")])
        assert code == 2
        assert json.loads(capsys.readouterr().err.strip().splitlines()[-1])["error"]["code"] == "VALIDATION_ERROR"

    def test_evaluate_identical_files(self, balanced_csv, capsys):
        """Test an estimate equal to the sources scores 0."""
        assert main(["evaluate", "--true", str(balanced_csv), "--estimate", str(balanced_csv)]) == 0
        payload = stdout_json(capsys)
        assert payload["discordance"] == 0.0
        assert payload["permutation"] == [0, 1]

    def test_mix_then_evaluate(self, balanced_csv, tmp_path, capsys):
        """Test a coordinate swap is recovered up to permutation."""
        swapped = tmp_path / "m.csv"
        assert main(["mix", "-i", str(balanced_csv), "--family", "linear", "--params", "0,1,1,0",
                     "-o", str(swapped)]) == 0
        capsys.readouterr()
        main(["evaluate", "--true", str(balanced_csv), "--estimate", str(swapped)])
        payload = stdout_json(capsys)
        assert payload["discordance"] == 0.0
        assert payload["permutation"] == [1, 0]

    def test_mix_unknown_family(self, tmp_path):
        """Test an unregistered family exits with 2."""
        path = tmp_path / "s.csv"
        simulate(path)
        code = main(["mix", "-i", str(path), "--family", "spline", "-o", str(tmp_path / "m.csv")])
        assert code == 2

    def test_contrast_output(self, tmp_path, capsys):
        """Test the contrast JSON carries depth, mu and a finite value."""
        path = tmp_path / "s.csv"
        simulate(path)
        capsys.readouterr()
        assert main(["contrast", "-i", str(path), "--depth", "3", "--mu", "3"]) == 0
        payload = stdout_json(capsys)
        assert payload["depth"] == 3
        assert payload["mu"] == 3
        assert payload["contrast"] >= 0.0

    def test_contrast_mu_exceeds_depth(self, tmp_path, capsys):
        """Test mu > depth exits with 2."""
        path = tmp_path / "s.csv"
        simulate(path)
        capsys.readouterr()
        assert main(["contrast", "-i", str(path), "--depth", "3", "--mu", "4"]) == 2
        assert "MU_EXCEEDS_DEPTH" in capsys.readouterr().err

    def test_separate_grid_with_discordance(self, tmp_path, capsys):
        """Test a small lattice search writes contrast and discordance columns."""
        sources, mixture, grid = tmp_path / "s.csv", tmp_path / "m.csv", tmp_path / "grid.csv"
        simulate(sources, steps=20)
        main(["mix", "-i", str(sources), "--family", "henon", "--params", "1.4,0.3",
              "--option", "rotation=45", "-o", str(mixture)])
        capsys.readouterr()
        code = main([
            "separate", "-i", str(mixture), "--family", "henon", "--params", "1.4,0.3",
            "--option", "rotation=45", "--inverse", "--method", "grid",
            "--axis", "1.3:1.5:3", "--axis", "0.25:0.35:3", "--depth", "3", "--mu", "3",
            "--grid-output", str(grid), "--true", str(sources),
        ])
        assert code == 0
        assert len(stdout_json(capsys)["best_theta"]) == 2
        lines = grid.read_text(encoding="utf-8").splitlines()
        assert lines[0] == "theta1,theta2,contrast,discordance"
        assert len(lines) == 10

    def test_separate_axis_count_checked(self, tmp_path):
        """Test the lattice needs one axis per free parameter."""
        path = tmp_path / "s.csv"
        simulate(path)
        code = main(["separate", "-i", str(path), "--family", "henon", "--params", "1.4,0.3",
                     "--inverse", "--method", "grid", "--axis", "1:2:3", "--depth", "3", "--mu", "3"])
        assert code == 2

    def test_contrastivity(self, capsys):
        """Test distinct fBM Hurst indices satisfy the witness search."""
        assert main(["contrastivity", "--model", "fbm", "--d", "2", "--param", "hurst=0.3,0.7"]) == 0
        assert stdout_json(capsys)["satisfied"] is True

    def test_malformed_csv(self, tmp_path, capsys):
        """Test a file with a wrong header exits with 2 and names the row."""
        path = tmp_path / "bad.csv"
        path.write_text("id,time,a\n0,0.0,1.0\n", encoding="utf-8")
        assert main(["contrast", "-i", str(path), "--depth", "2", "--mu", "2"]) == 2
        error = json.loads(capsys.readouterr().err.strip().splitlines()[-1])["error"]
        assert error["code"] == "MALFORMED_CSV"

    def test_missing_input(self, tmp_path):
        """Test a missing file is reported with a non-zero code."""
        assert main(["contrast", "-i", str(tmp_path / "none.csv")]) != 0

    def test_usage_error(self):
        """Test argparse usage errors exit with 2."""
        assert main(["simulate", "--model", "no_such_model"]) == 2


# ============================================================================
# EXPERIMENTS
# ============================================================================

class TestExperimentCommand:
    """Tests for bundled and user experiments."""

    def test_list(self, capsys):
        """Test the bundled experiments are listed."""
        assert main(["experiment", "--list"]) == 0
        names = [line.split("\t")[0] for line in capsys.readouterr().out.splitlines()]
        assert {"henon_ou", "mlp_ou", "clayton_henon"} <= set(names)

    def test_needs_exactly_one_source(self, tmp_path):
        """Test --name and --config are mutually exclusive."""
        assert main(["experiment", "--name", "henon_ou", "--config", str(tmp_path / "x.json")]) == 2

    def test_unknown_name(self):
        """Test an unknown experiment name is rejected."""
        assert main(["experiment", "--name", "no_such_experiment"]) != 0

    def test_config_mu_exceeds_depth(self, tmp_path, capsys):
        """Test an invalid config fails before any work is done."""
        config = {
            "name": "invalid",
            "seed": 1,
            "source": {"kind": "ou", "d": 2, "n_paths": 4, "n_steps": 10,
                       "params": {"theta": [1.0, 2.0], "sigma": [1.0, 1.0]}},
            "mixing": {"family": "identity"},
            "candidate": {"family": "identity"},
            "optimizer": {"method": "nelder_mead"},
            "depth": 3,
            "mu": 4,
        }
        path = tmp_path / "invalid.json"
        path.write_text(json.dumps(config), encoding="utf-8")
        output = tmp_path / "run"
        assert main(["experiment", "--config", str(path), "--output-dir", str(output)]) == 2
        assert "mu exceeds depth" in capsys.readouterr().err
        assert not output.exists()

    @pytest.mark.slow
    def test_henon_grid_argmins_agree(self, tmp_path, capsys):
        """Test the contrast and discordance lattice minimizers are neighbours."""
        output = tmp_path / "henon_ou"
        assert main(["experiment", "--name", "henon_ou", "--output-dir", str(output)]) == 0
        points, phi = read_grid(output / "phi_grid.csv", "phi")
        _, delta = read_grid(output / "delta_grid.csv", "delta")
        assert len(phi) == 21 * 21

        phi_cell = lattice_index(points, int(np.argmin(phi)))
        delta_cell = lattice_index(points, int(np.argmin(delta)))
        assert max(abs(a - b) for a, b in zip(phi_cell, delta_cell)) <= 1
        assert delta[int(np.argmin(phi))] < 0.2

    @pytest.mark.slow
    def test_rerun_reproduces_manifest(self, tmp_path, capsys):
        """Test reruns give the same manifest hash for any worker count."""
        hashes = []
        for threads, folder in [("1", "a"), ("1", "b"), ("4", "c")]:
            code = main(["--threads", threads, "experiment", "--name", "henon_ou",
                         "--output-dir", str(tmp_path / folder)])
            assert code == 0
            hashes.append(stdout_json(capsys)["manifest_hash"])
        assert len(set(hashes)) == 1
        assert (tmp_path / "a" / "phi_grid.csv").read_bytes() == (tmp_path / "c" / "phi_grid.csv").read_bytes()
