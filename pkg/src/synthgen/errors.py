"""Exception hierarchy shared across the suite.

Each class carries the process exit code the CLI maps it to, so error
category and exit status cannot drift apart.
"""


class SynthgenError(Exception):
    """Base class for all suite errors."""

    exit_code = 1


class ConfigError(SynthgenError):
    """Invalid configuration, schema, or model file."""

    exit_code = 2


class ParameterError(SynthgenError):
    """Argument outside its mathematical or practical domain."""

    exit_code = 4


# I/O failures are plain OSError; the CLI maps those to exit code 3.
IO_EXIT_CODE = 3
