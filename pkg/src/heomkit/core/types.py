"""Type definitions shared across the heomkit modules."""
from typing import Dict, List, Optional, Tuple

import numpy as np
import numpy.typing as npt
from typing_extensions import TypedDict

# Array aliases for clarity
ComplexArray = npt.NDArray[np.complex128]
RealArray = npt.NDArray[np.float64]
IntArray = npt.NDArray[np.int64]

# A hierarchy label interleaves occupations as (m_1, n_1, ..., m_K, n_K)
Label = Tuple[int, ...]
Caps = Tuple[int, ...]
ObservableMap = Dict[str, ComplexArray]


class ScanRow(TypedDict):
    """One row of a mode-count scan."""
    omega_min: float
    modes: Optional[int]
    achieved_error: Optional[float]
    status: str
    message: str


class Regression(TypedDict):
    """Least-squares fit of K against ln(1/omega_min)."""
    slope: Optional[float]
    intercept: Optional[float]
    r_squared: Optional[float]


class FitReport(TypedDict):
    """Summary written next to a ModeSet file."""
    status: str
    modes: Optional[int]
    delta: float
    achieved_error: Optional[float]
    best_residual: Optional[float]
    grid_points: int
    max_time_error: Optional[float]


class MpoReport(TypedDict):
    """Outcome of the MPO verification checks."""
    passed: bool
    dense_deviation: float
    commutation_deviation: Optional[float]
    block_commutator: Optional[float]
    site_deviations: List[float]
    worst_site: Optional[str]
