"""End-to-end runs of the heomkit subcommands through main()."""
from pathlib import Path

import numpy as np
import pandas as pd
import pytest
import yaml

from heomkit.__main__ import EXIT_CONFIG, EXIT_NUMERICAL, EXIT_OK, main
from heomkit.models.modes import ModeSet, read_modes, write_modes

from tests.conftest import SIGMA_X, SIGMA_Z, UP, WINDOW, matrix_literal


@pytest.fixture
def rabi_section() -> dict:
    return {
        "hamiltonian": matrix_literal(0.5 * SIGMA_X),
        "coupling": matrix_literal(SIGMA_Z),
        "initial_state": matrix_literal(UP),
    }


@pytest.fixture
def run_config(tmp_path, write_config, rabi_section):
    """Write a propagate configuration over a stored ModeSet."""

    def _build(modes: ModeSet, method: dict, name: str = "run.yaml") -> Path:
        modes_path = write_modes(modes, tmp_path / f"{Path(name).stem}_modes.yaml")
        return write_config({
            "system": rabi_section,
            "modes": {"file": str(modes_path)},
            "method": {"step": 0.01, **method},
            "output": {
                "t_final": 2.0,
                "sample_interval": 0.1,
                "observables": {"sz": matrix_literal(SIGMA_Z), "sx": matrix_literal(SIGMA_X)},
            },
        }, name)

    return _build


def test_decompose_writes_modes_fidelity_and_report(tmp_path, write_config):
    config = write_config({
        "bath": {"family": "lorentzian-noise", "lorentzians": [[0.5, 1.0, 0.3]]},
        "fit": {"omega_min": 1e-2, "omega_max": 1e2, "delta": 1e-10,
                "points_per_decade": 10, "fidelity_points": 5},
    })
    out = tmp_path / "out"
    assert main(["--config", str(config), "--out", str(out), "decompose"]) == EXIT_OK
    modes = read_modes(out / "modes.yaml")
    dominant = max(modes, key=lambda m: m.amplitude)
    assert dominant.z == pytest.approx(1.0 + 0.5j, abs=1e-7)
    report = yaml.safe_load((out / "fit_report.yaml").read_text())
    assert report["status"] == "ok"
    assert report["achieved_error"] <= 1e-10
    fidelity = pd.read_csv(out / "fidelity.csv")
    assert len(fidelity) == 5
    assert fidelity["abs_error"].max() < 1e-7


def test_propagate_without_modes_is_unitary(tmp_path, run_config, empty_modes):
    out = tmp_path / "out"
    config = run_config(empty_modes, {"name": "fp-heom", "tier": 2})
    assert main(["--config", str(config), "--out", str(out), "propagate"]) == EXIT_OK
    frame = pd.read_csv(out / "trajectory.csv")
    assert list(frame.columns[:5]) == ["t", "sz_re", "sz_im", "sx_re", "sx_im"]
    assert {"trace_re", "trace_im", "hermiticity", "min_eigenvalue", "pairing"} <= set(frame.columns)
    assert np.allclose(frame["sz_re"], np.cos(frame["t"]), atol=1e-8)
    sidecar = yaml.safe_load((out / "trajectory.yaml").read_text())
    assert sidecar["trace_residual"] < 1e-12
    assert sidecar["metadata"]["method"] == "fp-heom"


def test_propagate_checks_tier_convergence(tmp_path, run_config, weak_modes):
    out = tmp_path / "out"
    config = run_config(weak_modes, {"name": "fp-heom", "tier": 2, "check_convergence": True})
    assert main(["--config", str(config), "--out", str(out), "--tolerance", "1e-2", "propagate"]) == EXIT_OK
    table = pd.read_csv(out / "convergence.csv")
    assert list(table["tier"]) == [2]
    assert yaml.safe_load((out / "trajectory.yaml").read_text())["converged"] is True


@pytest.mark.parametrize("method", [
    {"name": "lindblad", "caps": 2},
    {"name": "alt-lindblad", "caps": [2, 1], "assembly": "operator"},
    {"name": "redfield-plus", "variant": "tier1"},
    {"name": "redfield"},
    {"name": "sln", "trajectories": 4},
    {"name": "hops", "trajectories": 4, "tier": 2},
])
def test_every_method_writes_a_trajectory(tmp_path, run_config, weak_modes, method):
    modes = weak_modes
    if method["name"] == "lindblad":
        modes = ModeSet.from_arrays(np.array([0.02 + 0.01j]), np.array([1.0 + 0.5j]), WINDOW)
    out = tmp_path / "out"
    config = run_config(modes, method)
    assert main(["--config", str(config), "--out", str(out), "--seed", "3", "propagate"]) == EXIT_OK
    frame = pd.read_csv(out / "trajectory.csv")
    assert len(frame) == 21
    assert frame["t"].iloc[-1] == pytest.approx(2.0)
    if method["name"] in ("sln", "hops"):
        assert "sz_stderr" in frame.columns
        assert (frame["trajectories"] == 4).all()
    sidecar = yaml.safe_load((out / "trajectory.yaml").read_text())
    if method["name"] in ("redfield-plus", "redfield"):
        assert 0.0 <= sidecar["metadata"]["gibbs_population_deviation"] <= 1.0
    else:
        assert "gibbs_population_deviation" not in sidecar["metadata"]


def test_stochastic_runs_reproduce_with_the_same_seed(tmp_path, run_config, weak_modes):
    config = run_config(weak_modes, {"name": "sln", "trajectories": 6})
    for run in ("a", "b"):
        assert main(["--config", str(config), "--out", str(tmp_path / run), "--seed", "8",
                     "propagate"]) == EXIT_OK
    first = (tmp_path / "a" / "trajectory.csv").read_text()
    assert first == (tmp_path / "b" / "trajectory.csv").read_text()


def test_conventional_heom_on_oscillating_modes_is_a_numerical_failure(tmp_path, run_config, weak_modes):
    config = run_config(weak_modes, {"name": "conventional-heom", "tier": 2})
    assert main(["--config", str(config), "--out", str(tmp_path / "out"), "propagate"]) == EXIT_NUMERICAL


def test_malformed_configuration_exits_with_config_error(tmp_path, write_config):
    broken = tmp_path / "broken.yaml"
    broken.write_text("method: [unclosed\n")
    assert main(["--config", str(broken), "propagate"]) == EXIT_CONFIG
    missing_system = write_config({"modes": {"file": str(tmp_path / "none.yaml")}})
    assert main(["--config", str(missing_system), "--out", str(tmp_path), "propagate"]) == EXIT_CONFIG
    unknown = write_config({"method": {"name": "exact"}}, "unknown.yaml")
    assert main(["--config", str(unknown), "--out", str(tmp_path), "propagate"]) == EXIT_CONFIG


def test_compare_identical_trajectories(tmp_path, run_config, empty_modes):
    out = tmp_path / "run"
    config = run_config(empty_modes, {"name": "fp-heom", "tier": 1})
    assert main(["--config", str(config), "--out", str(out), "propagate"]) == EXIT_OK
    copy = tmp_path / "copy.csv"
    copy.write_text((out / "trajectory.csv").read_text())
    compare_out = tmp_path / "compare"
    assert main(["--out", str(compare_out), "--tolerance", "1e-12", "compare",
                 str(out / "trajectory.csv"), str(copy)]) == EXIT_OK
    summary = pd.read_csv(compare_out / "comparison.csv")
    assert list(summary["observable"]) == ["sx", "sz"]
    assert (summary["max_deviation"] == 0.0).all()
    assert not summary["flagged"].any()
    assert yaml.safe_load((compare_out / "comparison.yaml").read_text())["flagged"] == 0


def test_compare_runs_configurations_in_process(tmp_path, run_config, weak_modes):
    heom = run_config(weak_modes, {"name": "fp-heom", "tier": 2}, "heom.yaml")
    tier1 = run_config(weak_modes, {"name": "redfield-plus", "variant": "tier1"}, "tier1.yaml")
    out = tmp_path / "compare"
    assert main(["--out", str(out), "--tolerance", "1e-1", "compare", str(heom), str(tier1)]) == EXIT_OK
    summary = pd.read_csv(out / "comparison.csv")
    assert set(summary["first"]) == {"heom"} and set(summary["second"]) == {"tier1"}
    timeline = pd.read_csv(out / "comparison_timeline.csv")
    assert "heom-tier1:sz" in timeline.columns


def test_compare_needs_two_inputs(tmp_path):
    assert main(["--out", str(tmp_path), "compare", str(tmp_path / "only.csv")]) == EXIT_CONFIG


def test_verify_mpo(tmp_path, run_config, weak_modes):
    config = run_config(weak_modes, {"name": "fp-heom", "caps": [1, 1]})
    out = tmp_path / "out"
    assert main(["--config", str(config), "--out", str(out), "verify-mpo"]) == EXIT_OK
    report = yaml.safe_load((out / "mpo_report.yaml").read_text())
    assert report["passed"] is True
    assert report["caps"] == [1, 1]
    assert (out / "mpo_chain.txt").read_text().startswith("heomkit-mpo/1")


def test_scan_modes(tmp_path, write_config):
    config = write_config({
        "bath": {"family": "lorentzian-noise", "lorentzians": [[0.5, 1.0, 0.3]]},
        "fit": {"omega_min_values": [1e-2, 1e-1], "omega_max": 1e2, "delta": 1e-10,
                "points_per_decade": 10},
    })
    out = tmp_path / "out"
    assert main(["--config", str(config), "--out", str(out), "scan-modes"]) == EXIT_OK
    frame = pd.read_csv(out / "scan.csv")
    assert list(frame.columns) == ["omega_min", "modes", "achieved_error", "status", "message",
                                   "log_inverse_omega_min"]
    assert list(frame["omega_min"]) == [1e-1, 1e-2]
    assert (frame["status"] == "ok").all()
    sidecar = yaml.safe_load((out / "scan.yaml").read_text())
    assert sidecar["rows"] == 2 and sidecar["failed_rows"] == 0


@pytest.mark.parametrize("edges", [[1e-2, 1e-1, 0.01], [1e-2, "low"], []])
def test_scan_modes_rejects_bad_edge_lists(tmp_path, write_config, edges):
    config = write_config({
        "bath": {"family": "lorentzian-noise", "lorentzians": [[0.5, 1.0, 0.3]]},
        "fit": {"omega_min_values": edges, "omega_max": 1e2, "delta": 1e-10},
    })
    out = tmp_path / "out"
    assert main(["--config", str(config), "--out", str(out), "scan-modes"]) == EXIT_CONFIG
    assert not (out / "scan.csv").exists()
