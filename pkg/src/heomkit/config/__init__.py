"""Configuration management for the heomkit package."""
import copy
import os
from pathlib import Path
from typing import Any, Dict, List, Optional, Union

import yaml
from dotenv import load_dotenv
from typing_extensions import TypedDict

from heomkit.core.errors import ConfigError

# Load environment variables from .env file
load_dotenv()

DEFAULT_PATH = Path(__file__).parent / "default.yaml"
LOG_LEVEL_ENV = "HEOMKIT_LOG_LEVEL"

_MISSING = object()


class BathSection(TypedDict, total=False):
    """Type definition for the bath section."""
    family: str
    alpha: float
    cutoff: float
    exponent: float
    beta: Optional[float]
    lorentzians: List[List[float]]
    table: str
    extrapolate: bool


class FitSection(TypedDict, total=False):
    """Type definition for the decomposition settings."""
    omega_min: float
    omega_max: float
    delta: float
    k_max: int
    points_per_decade: int
    froissart_floor: float
    far_field_decades: int
    max_refinements: int
    omega_min_values: List[float]
    fidelity_points: int
    quadrature_tol: float
    quadrature_scheme: str


class SystemSection(TypedDict, total=False):
    """Type definition for the system section; matrices are row lists."""
    hamiltonian: List[List[Any]]
    coupling: List[List[Any]]
    initial_state: List[List[Any]]


class MethodSection(TypedDict, total=False):
    """Type definition for the propagation method section."""
    name: str
    tier: int
    caps: Optional[List[int]]
    integrator: str
    step: Optional[float]
    rtol: float
    atol: float
    variant: str
    assembly: str
    trajectories: int
    seed: int
    threads: int
    tolerance: float


class OutputSection(TypedDict, total=False):
    """Type definition for the output section."""
    directory: str
    t_final: float
    sample_interval: float
    observables: Dict[str, List[List[Any]]]


class FileHandlerSection(TypedDict):
    """Type definition for the rotating log file."""
    enabled: bool
    path: str
    max_bytes: int
    backup_count: int


class LoggingSection(TypedDict):
    """Type definition for logging configuration."""
    level: str
    format: str
    handlers: Dict[str, FileHandlerSection]


def _resolve_env_vars(value: str) -> str:
    """Resolve ${VAR} references in a string from the environment.

    Args:
        value: String potentially containing environment variables.

    Returns:
        String with environment variables resolved.
    """
    if not isinstance(value, str):
        return value
    if "${" in value:
        for env_var in os.environ:
            value = value.replace(f"${{{env_var}}}", os.environ[env_var])
    return value


def _process_config_values(config: Any) -> Any:
    """Recursively resolve environment variables in strings, dicts and lists."""
    if isinstance(config, dict):
        return {key: _process_config_values(value) for key, value in config.items()}
    if isinstance(config, list):
        return [_process_config_values(value) for value in config]
    if isinstance(config, str):
        return _resolve_env_vars(config)
    return config


def _deep_merge(base: Dict[str, Any], override: Dict[str, Any]) -> Dict[str, Any]:
    """Merge override into a copy of base; nested mappings merge key by key."""
    merged = copy.deepcopy(base)
    for key, value in override.items():
        if isinstance(value, dict) and isinstance(merged.get(key), dict):
            merged[key] = _deep_merge(merged[key], value)
        else:
            merged[key] = copy.deepcopy(value)
    return merged


def _read_yaml(path: Path) -> Dict[str, Any]:
    if not path.exists():
        raise ConfigError(f"Configuration file not found: {path}")
    with open(path, "r") as file:
        try:
            data = yaml.safe_load(file)
        except yaml.YAMLError as e:
            raise ConfigError(f"Invalid YAML configuration in {path}: {str(e)}") from e
    if data is None:
        return {}
    if not isinstance(data, dict):
        raise ConfigError(f"Configuration in {path} must be a mapping")
    return data


class Config:
    """Configuration manager for heomkit runs.

    The packaged default.yaml holds every default; a run file is deep-merged
    over it. Values are read with dot notation, e.g. ``config.get("method.tier")``.
    """

    def __init__(
        self,
        config_path: Optional[Union[str, Path]] = None,
        overrides: Optional[Dict[str, Any]] = None,
    ) -> None:
        """Initialize the configuration manager.

        Args:
            config_path: Run configuration merged over the packaged defaults.
                If not provided, only the defaults are loaded.
            overrides: Extra mapping merged last, mainly for tests.

        Raises:
            ConfigError: If a file is missing or is not a YAML mapping.
        """
        self.path = Path(config_path) if config_path is not None else None
        self._config: Dict[str, Any] = self._load_config(self.path, overrides or {})

    def _load_config(self, config_path: Optional[Path], overrides: Dict[str, Any]) -> Dict[str, Any]:
        config = _read_yaml(DEFAULT_PATH)
        if config_path is not None:
            config = _deep_merge(config, _read_yaml(config_path))
        config = _deep_merge(config, overrides)
        config = _process_config_values(config)

        # Set the log level from the environment if specified
        level = os.getenv(LOG_LEVEL_ENV)
        if level:
            config.setdefault("logging", {})["level"] = level.upper()
        return config

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> "Config":
        """Build a configuration from an in-memory mapping over the defaults."""
        return cls(None, data)

    def get(self, key: str, default: Any = None) -> Any:
        """Get a configuration value using dot notation.

        Args:
            key: Configuration key in dot notation (e.g., "fit.delta")
            default: Default value if the key doesn't exist or is null

        Returns:
            The configuration value or the default if not found
        """
        value: Any = self._config
        for k in key.split("."):
            if not isinstance(value, dict) or k not in value:
                return default
            value = value[k]
        return default if value is None else value

    def has(self, key: str) -> bool:
        """Whether key is present with a non-null value."""
        return self.get(key, _MISSING) is not _MISSING

    def require(self, key: str) -> Any:
        """Get a value that must be present.

        Raises:
            ConfigError: Naming the missing dotted key.
        """
        value = self.get(key, _MISSING)
        if value is _MISSING:
            raise ConfigError(f"Missing required configuration key: {key}")
        return value

    def set(self, key: str, value: Any) -> None:
        """Set a value using dot notation, creating intermediate sections."""
        keys = key.split(".")
        section = self._config
        for k in keys[:-1]:
            if not isinstance(section.get(k), dict):
                section[k] = {}
            section = section[k]
        section[keys[-1]] = value

    def section(self, name: str) -> Dict[str, Any]:
        """A copy of one top-level section, empty if absent."""
        value = self._config.get(name) or {}
        if not isinstance(value, dict):
            raise ConfigError(f"Configuration section {name!r} must be a mapping")
        return copy.deepcopy(value)

    def to_dict(self) -> Dict[str, Any]:
        return copy.deepcopy(self._config)

    @property
    def bath(self) -> BathSection:
        """Get the bath section."""
        return self.section("bath")  # type: ignore[return-value]

    @property
    def fit(self) -> FitSection:
        """Get the decomposition settings."""
        return self.section("fit")  # type: ignore[return-value]

    @property
    def system(self) -> SystemSection:
        """Get the system section."""
        return self.section("system")  # type: ignore[return-value]

    @property
    def method(self) -> MethodSection:
        """Get the propagation method section."""
        return self.section("method")  # type: ignore[return-value]

    @property
    def output(self) -> OutputSection:
        """Get the output section."""
        return self.section("output")  # type: ignore[return-value]

    @property
    def logging(self) -> LoggingSection:
        """Get the logging configuration section.

        Returns:
            LoggingSection: Dictionary containing logging configuration
        """
        return self.section("logging")  # type: ignore[return-value]
