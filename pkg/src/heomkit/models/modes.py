"""Exponential bath modes and the ModeSet interchange file."""
import cmath
import logging
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Dict, Iterator, List, Tuple, Union

import numpy as np
import yaml

from heomkit.core.errors import ConfigError
from heomkit.core.types import ComplexArray
from heomkit.models.base import ModelMixin, format_float

logger = logging.getLogger(__name__)

MODES_FORMAT = "heomkit-modes/1"


@dataclass(frozen=True)
class FrequencyWindow(ModelMixin):
    """Frequency window [omega_min, omega_max] sampled log-uniformly on both signs."""

    omega_min: float
    omega_max: float
    points_per_decade: float = 20.0

    def __post_init__(self) -> None:
        if not (math.isfinite(self.omega_min) and math.isfinite(self.omega_max)):
            raise ConfigError("frequency window bounds must be finite")
        if not 0.0 < self.omega_min < self.omega_max:
            raise ConfigError(
                "frequency window requires 0 < omega_min < omega_max, got "
                f"[{self.omega_min}, {self.omega_max}]"
            )
        if not self.points_per_decade > 0:
            raise ConfigError("points_per_decade must be positive")

    @property
    def decades(self) -> float:
        """Number of decades spanned by the window."""
        return math.log10(self.omega_max / self.omega_min)

    def contains(self, omega: np.ndarray) -> np.ndarray:
        """Mask of frequencies whose magnitude lies inside the window."""
        magnitude = np.abs(omega)
        scale = 1e-12
        return (magnitude >= self.omega_min * (1 - scale)) & (
            magnitude <= self.omega_max * (1 + scale)
        )


@dataclass(frozen=True)
class Mode(ModelMixin):
    """One damped-oscillating exponential d * exp(-z t) of the correlation function."""

    d: complex
    z: complex

    def __post_init__(self) -> None:
        object.__setattr__(self, "d", complex(self.d))
        object.__setattr__(self, "z", complex(self.z))
        if not (cmath.isfinite(self.d) and cmath.isfinite(self.z)):
            raise ConfigError(f"mode coefficients must be finite, got d={self.d}, z={self.z}")
        if not self.z.real > 0:
            raise ConfigError(f"mode damping rate must be positive, got z={self.z}")

    @property
    def gamma(self) -> float:
        """Damping rate Re z."""
        return self.z.real

    @property
    def omega(self) -> float:
        """Oscillation frequency Im z."""
        return self.z.imag

    @property
    def amplitude(self) -> float:
        """Modulus R of the mode weight."""
        return abs(self.d)

    @property
    def phase(self) -> float:
        """Phase theta of the mode weight in (-pi, pi]."""
        return cmath.phase(self.d)

    @property
    def sqrt_d(self) -> complex:
        """Principal square root of the weight, sqrt(R) * exp(i theta / 2)."""
        return cmath.sqrt(self.d)

    def correlation(self, t: Union[float, np.ndarray]) -> Union[complex, ComplexArray]:
        """Evaluate d * exp(-z t)."""
        return self.d * np.exp(-self.z * np.asarray(t))


@dataclass(frozen=True)
class ModeSet(ModelMixin):
    """Ordered exponential decomposition of a bath correlation function.

    Attributes:
        modes: The retained modes, in pole order.
        window: Frequency window the decomposition was fitted on.
        delta: Requested max-norm tolerance on the sampled noise power.
        achieved_error: Measured max-norm reconstruction error on the grid.
        grid_points: Number of window samples used for the fit.
    """

    modes: Tuple[Mode, ...]
    window: FrequencyWindow
    delta: float
    achieved_error: float
    grid_points: int = 0
    metadata: Dict[str, Any] = field(default_factory=dict, compare=False)

    def __post_init__(self) -> None:
        object.__setattr__(self, "modes", tuple(self.modes))
        if not self.delta > 0:
            raise ConfigError(f"delta must be positive, got {self.delta}")

    def __len__(self) -> int:
        return len(self.modes)

    def __iter__(self) -> Iterator[Mode]:
        return iter(self.modes)

    def __getitem__(self, index: int) -> Mode:
        return self.modes[index]

    @property
    def K(self) -> int:
        """Number of modes."""
        return len(self.modes)

    @property
    def weights(self) -> ComplexArray:
        """Array of mode weights d_k."""
        return np.array([m.d for m in self.modes], dtype=np.complex128)

    @property
    def rates(self) -> ComplexArray:
        """Array of complex rates z_k."""
        return np.array([m.z for m in self.modes], dtype=np.complex128)

    @classmethod
    def from_arrays(
        cls,
        d: ComplexArray,
        z: ComplexArray,
        window: FrequencyWindow,
        delta: float = 1e-9,
        achieved_error: float = 0.0,
    ) -> "ModeSet":
        """Build a ModeSet from parallel weight and rate arrays."""
        if len(d) != len(z):
            raise ConfigError("weight and rate arrays must have equal length")
        modes = tuple(Mode(complex(dk), complex(zk)) for dk, zk in zip(d, z))
        return cls(modes, window, delta, achieved_error)


class _ModesDumper(yaml.SafeDumper):
    pass


def _represent_float(dumper: yaml.SafeDumper, value: float) -> yaml.ScalarNode:
    return dumper.represent_scalar("tag:yaml.org,2002:float", format_float(value))


_ModesDumper.add_representer(float, _represent_float)


def write_modes(mode_set: ModeSet, path: Union[str, Path]) -> Path:
    """Write a ModeSet to a YAML file that round-trips every coefficient bit-exactly.

    Args:
        mode_set: Decomposition to write.
        path: Destination file.

    Returns:
        Path: The written file.
    """
    path = Path(path)
    document: Dict[str, Any] = {
        "format": MODES_FORMAT,
        "delta": float(mode_set.delta),
        "achieved_error": float(mode_set.achieved_error),
        "grid_points": int(mode_set.grid_points),
        "window": {k: float(v) for k, v in mode_set.window.to_dict().items()},
        "modes": [
            {
                "d_re": float(m.d.real),
                "d_im": float(m.d.imag),
                "gamma": float(m.z.real),
                "omega": float(m.z.imag),
            }
            for m in mode_set.modes
        ],
    }
    if mode_set.metadata:
        document["metadata"] = mode_set.metadata
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w") as f:
        yaml.dump(document, f, Dumper=_ModesDumper, sort_keys=False)
    logger.info(f"Wrote {mode_set.K} modes to {path}")
    return path


def read_modes(path: Union[str, Path]) -> ModeSet:
    """Read a ModeSet previously written with write_modes.

    Args:
        path: ModeSet YAML file.

    Returns:
        ModeSet: The stored decomposition.

    Raises:
        FileNotFoundError: If the file does not exist.
        ConfigError: If the file is not a valid ModeSet document.
    """
    path = Path(path)
    if not path.exists():
        raise FileNotFoundError(f"ModeSet file not found: {path}")
    with open(path, "r") as f:
        document = yaml.safe_load(f)
    if not isinstance(document, dict) or document.get("format") != MODES_FORMAT:
        raise ConfigError(f"{path} is not a {MODES_FORMAT} document")
    try:
        window = FrequencyWindow.from_dict(document["window"])
        modes: List[Mode] = [
            Mode(complex(entry["d_re"], entry["d_im"]), complex(entry["gamma"], entry["omega"]))
            for entry in document["modes"]
        ]
        return ModeSet(
            tuple(modes),
            window,
            float(document["delta"]),
            float(document["achieved_error"]),
            int(document.get("grid_points", 0)),
            dict(document.get("metadata") or {}),
        )
    except (AttributeError, KeyError, TypeError) as e:
        raise ConfigError(f"Malformed ModeSet file {path}: {str(e)}")
