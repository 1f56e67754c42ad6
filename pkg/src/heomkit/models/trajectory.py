"""Time-series records produced by the propagators."""
import logging
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Dict, List, Optional, Union

import numpy as np
import pandas as pd

from heomkit.core.errors import ConfigError
from heomkit.core.types import ComplexArray, RealArray

logger = logging.getLogger(__name__)

CSV_FLOAT_FORMAT = "%.17g"
DIAGNOSTIC_COLUMNS = ("trace_re", "trace_im", "hermiticity", "pairing", "min_eigenvalue")


@dataclass
class TrajectoryRecord:
    """Observables and diagnostics sampled on a time grid.

    Attributes:
        times: Sample times.
        observables: Observable name to complex expectation values.
        std_errors: Observable name to standard error, for ensemble averages.
        diagnostics: Diagnostic name to real values, e.g. trace and hermiticity.
        trajectories: Number of trajectories averaged, None for deterministic runs.
        metadata: Free-form run metadata written to the sidecar file.
        final_density: Reduced density matrix at the last sample, when the
            method tracks one. It is not written to the CSV.
    """

    times: RealArray
    observables: Dict[str, ComplexArray] = field(default_factory=dict)
    std_errors: Dict[str, RealArray] = field(default_factory=dict)
    diagnostics: Dict[str, RealArray] = field(default_factory=dict)
    trajectories: Optional[int] = None
    metadata: Dict[str, Any] = field(default_factory=dict)
    final_density: Optional[ComplexArray] = None

    def __post_init__(self) -> None:
        self.times = np.asarray(self.times, dtype=np.float64)
        n = len(self.times)
        for name, values in list(self.observables.items()):
            self.observables[name] = np.asarray(values, dtype=np.complex128)
            if len(self.observables[name]) != n:
                raise ConfigError(f"observable {name!r} does not match the time grid")

    def observable(self, name: str) -> ComplexArray:
        """Return the samples of one observable."""
        if name not in self.observables:
            raise KeyError(f"Observable {name!r} not recorded")
        return self.observables[name]

    def max_diagnostic(self, name: str, absolute: bool = True) -> Optional[float]:
        """Largest value of a diagnostic column, None if it was not recorded."""
        values = self.diagnostics.get(name)
        if values is None or len(values) == 0:
            return None
        return float(np.max(np.abs(values) if absolute else values))

    def to_frame(self) -> pd.DataFrame:
        """Flatten the record into a DataFrame with one row per sample time."""
        columns: Dict[str, Any] = {"t": self.times}
        for name, values in self.observables.items():
            columns[f"{name}_re"] = values.real
            columns[f"{name}_im"] = values.imag
            if name in self.std_errors:
                columns[f"{name}_stderr"] = self.std_errors[name]
        if self.trajectories is not None:
            columns["trajectories"] = np.full(len(self.times), self.trajectories)
        for name, values in self.diagnostics.items():
            columns[name] = values
        return pd.DataFrame(columns)

    def write_csv(self, path: Union[str, Path]) -> Path:
        """Write the record as CSV with 17 significant digits."""
        path = Path(path)
        path.parent.mkdir(parents=True, exist_ok=True)
        self.to_frame().to_csv(path, index=False, float_format=CSV_FLOAT_FORMAT)
        logger.info(f"Wrote {len(self.times)} samples to {path}")
        return path

    @classmethod
    def from_frame(cls, frame: pd.DataFrame) -> "TrajectoryRecord":
        """Rebuild a record from a frame written by to_frame."""
        if "t" not in frame.columns:
            raise ConfigError("trajectory table has no 't' column")
        observables: Dict[str, ComplexArray] = {}
        std_errors: Dict[str, RealArray] = {}
        diagnostics: Dict[str, RealArray] = {}
        names: List[str] = [c[:-3] for c in frame.columns if c.endswith("_re")
                            and c not in ("trace_re",)]
        for name in names:
            imag = frame[f"{name}_im"].to_numpy() if f"{name}_im" in frame else 0.0
            observables[name] = frame[f"{name}_re"].to_numpy() + 1j * imag
            if f"{name}_stderr" in frame:
                std_errors[name] = frame[f"{name}_stderr"].to_numpy()
        for column in DIAGNOSTIC_COLUMNS:
            if column in frame:
                diagnostics[column] = frame[column].to_numpy()
        trajectories = int(frame["trajectories"].iloc[0]) if "trajectories" in frame else None
        return cls(
            times=frame["t"].to_numpy(),
            observables=observables,
            std_errors=std_errors,
            diagnostics=diagnostics,
            trajectories=trajectories,
        )

    @classmethod
    def read_csv(cls, path: Union[str, Path]) -> "TrajectoryRecord":
        """Load a record written by write_csv."""
        path = Path(path)
        if not path.exists():
            raise FileNotFoundError(f"Trajectory file not found: {path}")
        return cls.from_frame(pd.read_csv(path))


@dataclass
class EnsembleResult:
    """Average over stochastic trajectories.

    Attributes:
        record: Mean observables with standard errors and the trajectory count.
        mean_density: Averaged reduced density matrix at each sample time.
        trajectory_count: Trajectories that entered the average.
        failed_count: Trajectories excluded because they became non-finite.
        master_seed: Seed from which every trajectory stream was split.
    """

    record: TrajectoryRecord
    mean_density: ComplexArray
    trajectory_count: int
    failed_count: int
    master_seed: int

    @property
    def times(self) -> RealArray:
        return self.record.times
