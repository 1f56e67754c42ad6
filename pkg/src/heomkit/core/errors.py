"""Exception hierarchy shared by the heomkit modules."""


class HeomkitError(Exception):
    """Base exception for all heomkit errors."""
    pass


class ConfigError(HeomkitError):
    """Raised when a run configuration is missing keys or holds invalid values."""
    pass


class NumericalError(HeomkitError):
    """Base exception for failures inside a numerical pipeline step."""
    pass
