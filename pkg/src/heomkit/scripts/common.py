"""Common utilities for the pipeline scripts: config parsing and file output."""
import logging
import math
from pathlib import Path
from typing import Any, Dict, List, Optional, Union

import numpy as np
import pandas as pd
import yaml
from tabulate import tabulate

from heomkit.config import Config
from heomkit.core.bath import (
    LORENTZIAN_NOISE,
    TABULATED,
    BathError,
    BathSpec,
    LorentzianNoise,
    NoiseSpectrum,
    SpectralDensity,
    load_tabulated,
)
from heomkit.core.errors import ConfigError
from heomkit.core.fpheom import Truncation, default_step
from heomkit.core.integrate import IntegratorConfig, IntegrationError
from heomkit.core.modefit import decompose
from heomkit.core.types import ComplexArray
from heomkit.models.base import format_float
from heomkit.models.modes import FrequencyWindow, ModeSet, read_modes
from heomkit.models.system import SystemSpec

logger = logging.getLogger(__name__)

METHODS = (
    "fp-heom", "lindblad", "alt-lindblad", "conventional-heom",
    "redfield-plus", "redfield", "sln", "hops",
)


def load_config(path: Optional[Union[str, Path]] = None) -> Config:
    """Load the run configuration merged over the packaged defaults.

    Returns:
        Config: Application configuration instance.
    """
    return Config(path)


def parse_matrix(value: Any, key: str) -> ComplexArray:
    """Parse a row-list matrix literal whose entries are numbers or complex strings.

    Raises:
        ConfigError: Naming key when the literal is not a square numeric matrix.
    """
    if not isinstance(value, list) or not value or not all(isinstance(r, list) for r in value):
        raise ConfigError(f"{key} must be a non-empty list of rows")
    try:
        rows = [[complex(str(v).replace(" ", "")) if isinstance(v, str) else complex(v) for v in row]
                for row in value]
    except (TypeError, ValueError) as e:
        raise ConfigError(f"{key} holds a non-numeric entry: {str(e)}") from e
    width = len(rows)
    if any(len(row) != width for row in rows):
        raise ConfigError(f"{key} must be square, got rows of lengths {[len(r) for r in rows]}")
    return np.array(rows, dtype=np.complex128)


def build_system(config: Config) -> SystemSpec:
    """System Hamiltonian, coupling and initial state from the system section."""
    matrices = {name: parse_matrix(config.require(f"system.{name}"), f"system.{name}")
                for name in ("hamiltonian", "coupling", "initial_state")}
    return SystemSpec(**matrices)


def build_observables(config: Config, dim: int) -> Dict[str, ComplexArray]:
    """Named observables from output.observables, each checked against dim."""
    raw = config.get("output.observables", {})
    if not isinstance(raw, dict):
        raise ConfigError("output.observables must map names to matrices")
    observables: Dict[str, ComplexArray] = {}
    for name, literal in raw.items():
        key = f"output.observables.{name}"
        matrix = parse_matrix(literal, key)
        if matrix.shape != (dim, dim):
            raise ConfigError(f"{key} has shape {matrix.shape}, expected ({dim}, {dim})")
        if not np.allclose(matrix, matrix.conj().T, atol=1e-12):
            raise ConfigError(f"{key} must be Hermitian")
        observables[str(name)] = matrix
    return observables


def _beta(value: Any) -> float:
    if value is None:
        return math.inf
    beta = float(value)
    if not beta > 0:
        raise ConfigError(f"bath.beta must be positive or null, got {value}")
    return beta


def bath_beta(config: Config) -> float:
    """Inverse temperature of the bath section; null means zero temperature."""
    return _beta(config.get("bath.beta"))


def build_bath(config: Config) -> NoiseSpectrum:
    """Noise spectrum described by the bath section.

    Raises:
        ConfigError: For missing keys or parameters the bath rejects.
    """
    family = str(config.require("bath.family"))
    try:
        if family == LORENTZIAN_NOISE:
            return LorentzianNoise(tuple(tuple(t) for t in config.require("bath.lorentzians")))
        if family == TABULATED:
            density = load_tabulated(config.require("bath.table"),
                                     bool(config.get("bath.extrapolate", False)))
        else:
            density = SpectralDensity(
                family,
                alpha=float(config.get("bath.alpha", 0.0)),
                cutoff=float(config.get("bath.cutoff", 1.0)),
                exponent=float(config.get("bath.exponent", 1.0)),
                lorentzians=tuple(tuple(t) for t in config.get("bath.lorentzians", [])),
            )
        return BathSpec(density, _beta(config.get("bath.beta")))
    except (BathError, FileNotFoundError, TypeError, ValueError) as e:
        raise ConfigError(f"Invalid bath section: {str(e)}") from e


def build_window(config: Config, omega_min: Optional[float] = None) -> FrequencyWindow:
    """Fit window from the fit section, optionally with another lower edge."""
    low = float(omega_min if omega_min is not None else config.require("fit.omega_min"))
    high = float(config.require("fit.omega_max"))
    if not 0 < low < high:
        raise ConfigError(f"fit window must satisfy 0 < omega_min < omega_max, got [{low}, {high}]")
    return FrequencyWindow(low, high, float(config.get("fit.points_per_decade", 20)))


def fit_modes(config: Config, bath: Optional[NoiseSpectrum] = None) -> ModeSet:
    """Decompose the configured bath with the fit settings."""
    bath = bath if bath is not None else build_bath(config)
    return decompose(
        bath,
        build_window(config),
        float(config.require("fit.delta")),
        k_max=int(config.get("fit.k_max", 150)),
        froissart_floor=float(config.get("fit.froissart_floor", 1e-13)),
        far_field_decades=int(config.get("fit.far_field_decades", 3)),
        max_refinements=int(config.get("fit.max_refinements", 3)),
    )


def load_modes(config: Config) -> ModeSet:
    """ModeSet from modes.file when given, otherwise fitted from the bath section."""
    path = config.get("modes.file")
    if path:
        logger.info(f"Loading modes from {path}")
        return read_modes(path)
    return fit_modes(config)


def run_value(config: Config, name: str, cli_value: Any) -> Any:
    """Resolve seed, threads or tolerance: method section, then CLI flag, then run defaults."""
    if config.has(f"method.{name}"):
        return config.get(f"method.{name}")
    if cli_value is not None:
        return cli_value
    return config.get(f"run.{name}")


def build_truncation(config: Config) -> Truncation:
    caps = config.get("method.caps")
    return Truncation(int(config.get("method.tier", 4)),
                      tuple(int(c) for c in caps) if caps else None)


def mode_caps(config: Config, modes: ModeSet, key: str = "method.caps") -> List[int]:
    """Per-mode caps for the dense representations; a single value applies to all modes."""
    caps = config.get(key)
    if caps is None:
        return [max(int(config.get("method.tier", 4)), 1)] * modes.K
    caps = [int(c) for c in (caps if isinstance(caps, list) else [caps])]
    if len(caps) == 1:
        return caps * modes.K
    if len(caps) != modes.K:
        raise ConfigError(f"{key} needs 1 or {modes.K} entries, got {len(caps)}")
    return caps


def build_integrator(config: Config, system: SystemSpec, modes: ModeSet) -> IntegratorConfig:
    """Integrator settings; a missing step falls back to the FP-HEOM default step."""
    step = config.get("method.step")
    try:
        return IntegratorConfig(
            method=str(config.get("method.integrator", "rk4")),
            step=float(step) if step is not None else default_step(system, modes),
            rtol=float(config.get("method.rtol", 1e-8)),
            atol=float(config.get("method.atol", 1e-10)),
        )
    except IntegrationError as e:
        raise ConfigError(f"Invalid method.integrator settings: {str(e)}") from e


def output_dir(config: Config) -> Path:
    path = Path(config.get("output.directory", "results"))
    path.mkdir(parents=True, exist_ok=True)
    return path


def _plain(value: Any) -> Any:
    """Convert numpy scalars and containers to plain YAML-friendly values."""
    if isinstance(value, dict):
        return {str(k): _plain(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [_plain(v) for v in value]
    if isinstance(value, np.ndarray):
        return [_plain(v) for v in value.tolist()]
    if isinstance(value, (np.integer,)):
        return int(value)
    if isinstance(value, (np.floating, float)):
        return float(value)
    if isinstance(value, (np.bool_,)):
        return bool(value)
    if isinstance(value, complex):
        return {"re": value.real, "im": value.imag}
    return value


class _SidecarDumper(yaml.SafeDumper):
    pass


_SidecarDumper.add_representer(
    float, lambda dumper, value: dumper.represent_scalar("tag:yaml.org,2002:float", format_float(value))
)


def write_sidecar(path: Path, data: Dict[str, Any]) -> Path:
    """Write a diagnostics sidecar YAML file."""
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w") as file:
        yaml.dump(_plain(data), file, Dumper=_SidecarDumper, sort_keys=False)
    return path


def render_table(frame: Union[pd.DataFrame, List[Dict[str, Any]]]) -> str:
    """Console rendering of a summary table."""
    return tabulate(frame, headers="keys", tablefmt="github", floatfmt=".3e", showindex=False)
