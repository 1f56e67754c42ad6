"""Tests for the open-system description."""
import numpy as np
import pytest

from heomkit.core.errors import ConfigError
from heomkit.models.system import SystemSpec

from tests.conftest import SIGMA_X, SIGMA_Z, UP


def test_system_spec_normalizes_and_reports_dimension():
    system = SystemSpec([[0, 0.5], [0.5, 0]], SIGMA_Z, UP)
    assert system.dim == 2
    assert system.hamiltonian.dtype == np.complex128
    assert system.hamiltonian_norm == pytest.approx(0.5)


def test_system_spec_is_frozen_without_copy_helpers():
    system = SystemSpec(0.5 * SIGMA_X, SIGMA_Z, UP)
    with pytest.raises(AttributeError):
        system.hamiltonian = SIGMA_Z  # type: ignore[misc]
    assert not hasattr(system, "with_hamiltonian")
    assert not hasattr(system, "with_initial_state")


@pytest.mark.parametrize("hamiltonian, coupling, rho, message", [
    (np.ones((2, 3)), SIGMA_Z, UP, "square"),
    (SIGMA_X, np.eye(3), UP, "share dimension"),
    (np.array([[0, 1], [0, 0]]), SIGMA_Z, UP, "not Hermitian"),
    (SIGMA_X, SIGMA_Z, 2 * UP, "unit trace"),
    (SIGMA_X, SIGMA_Z, np.diag([1.5, -0.5]), "positive semidefinite"),
    (SIGMA_X, SIGMA_Z, np.array([[np.nan, 0], [0, 1]]), "non-finite"),
])
def test_system_spec_rejects_invalid_matrices(hamiltonian, coupling, rho, message):
    with pytest.raises(ConfigError, match=message):
        SystemSpec(hamiltonian, coupling, rho)
