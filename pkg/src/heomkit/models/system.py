"""Open-system description: Hamiltonian, coupling operator and initial state."""
from dataclasses import dataclass, field
from typing import Any, Dict, Optional

import numpy as np

from heomkit.core.errors import ConfigError
from heomkit.core.types import ComplexArray
from heomkit.models.base import ModelMixin

HERMITICITY_TOLERANCE = 1e-12
TRACE_TOLERANCE = 1e-12
POSITIVITY_TOLERANCE = 1e-12


def _as_square(matrix: Any, name: str) -> ComplexArray:
    array = np.array(matrix, dtype=np.complex128)
    if array.ndim != 2 or array.shape[0] != array.shape[1]:
        raise ConfigError(f"{name} must be a square matrix, got shape {array.shape}")
    if not np.all(np.isfinite(array)):
        raise ConfigError(f"{name} contains non-finite entries")
    return array


def _hermiticity_defect(matrix: ComplexArray) -> float:
    return float(np.max(np.abs(matrix - matrix.conj().T))) if matrix.size else 0.0


@dataclass(frozen=True, eq=False)
class SystemSpec(ModelMixin):
    """A finite-dimensional system linearly coupled to one Gaussian bath.

    Attributes:
        hamiltonian: Hermitian N x N system Hamiltonian.
        coupling: Hermitian N x N operator q that couples to the bath.
        initial_state: Density matrix rho(0), Hermitian, unit trace and positive.
        labels: Optional names for the basis states, used in reports only.
    """

    hamiltonian: ComplexArray
    coupling: ComplexArray
    initial_state: ComplexArray
    labels: Optional[Dict[int, str]] = field(default=None)

    def __post_init__(self) -> None:
        hamiltonian = _as_square(self.hamiltonian, "hamiltonian")
        coupling = _as_square(self.coupling, "coupling")
        rho = _as_square(self.initial_state, "initial_state")
        n = hamiltonian.shape[0]
        if n < 1:
            raise ConfigError("system dimension must be at least 1")
        if coupling.shape != (n, n) or rho.shape != (n, n):
            raise ConfigError(
                f"hamiltonian, coupling and initial_state must share dimension {n}"
            )
        for name, matrix in (("hamiltonian", hamiltonian), ("coupling", coupling),
                             ("initial_state", rho)):
            defect = _hermiticity_defect(matrix)
            scale = max(1.0, float(np.max(np.abs(matrix))))
            if defect > HERMITICITY_TOLERANCE * scale:
                raise ConfigError(f"{name} is not Hermitian (defect {defect:.3e})")
        trace = complex(np.trace(rho))
        if abs(trace - 1.0) > TRACE_TOLERANCE:
            raise ConfigError(f"initial_state must have unit trace, got {trace:.15g}")
        smallest = float(np.min(np.linalg.eigvalsh(rho)))
        if smallest < -POSITIVITY_TOLERANCE:
            raise ConfigError(
                f"initial_state is not positive semidefinite (eigenvalue {smallest:.3e})"
            )
        object.__setattr__(self, "hamiltonian", hamiltonian)
        object.__setattr__(self, "coupling", coupling)
        object.__setattr__(self, "initial_state", rho)

    @property
    def dim(self) -> int:
        """Hilbert-space dimension N."""
        return int(self.hamiltonian.shape[0])

    @property
    def hamiltonian_norm(self) -> float:
        """Spectral norm of the Hamiltonian."""
        return float(np.linalg.norm(self.hamiltonian, 2))
