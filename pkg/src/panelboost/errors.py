"""Exception hierarchy shared across the pipeline.

The CLI maps these onto exit codes: ConfigError -> 2, DataError -> 3,
anything else -> 4.
"""


class PanelboostError(Exception):
    """Base class for all package errors."""


class ConfigError(PanelboostError):
    """Invalid configuration file or parameter value."""


class DataError(PanelboostError):
    """Malformed or insufficient input data."""


class ModelFormatError(PanelboostError):
    """Corrupt, truncated, or version-incompatible model document."""
