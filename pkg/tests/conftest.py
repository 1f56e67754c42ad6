"""Shared fixtures: Pauli matrices, small qubit systems and mode sets."""
from pathlib import Path
from typing import Dict

import numpy as np
import pytest
import yaml

from heomkit.models.modes import FrequencyWindow, ModeSet
from heomkit.models.system import SystemSpec

SIGMA_X = np.array([[0, 1], [1, 0]], dtype=np.complex128)
SIGMA_Y = np.array([[0, -1j], [1j, 0]], dtype=np.complex128)
SIGMA_Z = np.array([[1, 0], [0, -1]], dtype=np.complex128)
UP = np.array([[1, 0], [0, 0]], dtype=np.complex128)
PLUS = 0.5 * np.ones((2, 2), dtype=np.complex128)

WINDOW = FrequencyWindow(1e-2, 1e2, 10)


@pytest.fixture
def pauli() -> Dict[str, np.ndarray]:
    return {"x": SIGMA_X, "y": SIGMA_Y, "z": SIGMA_Z}


@pytest.fixture
def rabi_system() -> SystemSpec:
    """H = sigma_x / 2 from |0><0|, so <sigma_z>(t) = cos(t) without a bath."""
    return SystemSpec(0.5 * SIGMA_X, SIGMA_Z, UP)


@pytest.fixture
def dephasing_system() -> SystemSpec:
    """q = sigma_z commuting with H, prepared in |+><+|."""
    return SystemSpec(0.5 * SIGMA_Z, SIGMA_Z, PLUS)


@pytest.fixture
def empty_modes() -> ModeSet:
    return ModeSet((), WINDOW, 1e-9, 0.0)


@pytest.fixture
def single_mode() -> ModeSet:
    """One damped oscillating mode with complex weight."""
    return ModeSet.from_arrays(np.array([0.02 + 0.01j]), np.array([1.0 + 0.5j]), WINDOW)


@pytest.fixture
def real_pole_modes() -> ModeSet:
    """Two non-oscillating modes, valid for the conventional HEOM."""
    return ModeSet.from_arrays(np.array([0.03 - 0.01j, 0.01 + 0.004j]),
                               np.array([0.8 + 0j, 2.5 + 0j]), WINDOW)


@pytest.fixture
def weak_modes() -> ModeSet:
    """Weak-coupling spin-boson bath with two modes and positive Re d."""
    return ModeSet.from_arrays(np.array([0.01 - 0.004j, 0.006 + 0.002j]),
                               np.array([1.2 + 0.4j, 3.0 - 1.0j]), WINDOW)


@pytest.fixture
def observables() -> Dict[str, np.ndarray]:
    return {"sz": SIGMA_Z, "sx": SIGMA_X}


def matrix_literal(matrix: np.ndarray) -> list:
    """Row-list literal with complex entries written as strings."""
    return [[str(complex(v)).strip("()") for v in row] for row in matrix]


@pytest.fixture
def write_config(tmp_path: Path):
    """Write a run configuration mapping to tmp_path and return its path."""

    def _write(data: dict, name: str = "run.yaml") -> Path:
        path = tmp_path / name
        path.write_text(yaml.safe_dump(data, sort_keys=False))
        return path

    return _write
