"""Exception types, grouped by the CLI exit-code categories they map to."""


class AmsfError(Exception):
    """Base class for package errors."""


class ConfigError(AmsfError):
    """Invalid experiment configuration (exit code 1)."""


class InputIOError(AmsfError):
    """Unreadable input or unwritable output path (exit code 2)."""


class EmbeddingIOError(InputIOError):
    """Malformed embedding interchange file."""


class NumericError(AmsfError):
    """Non-finite value detected during a run (exit code 3)."""
