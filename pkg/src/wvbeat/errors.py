"""Exception hierarchy; the CLI maps these onto exit codes."""


class WvbeatError(Exception):
    """Base class for all package errors."""


class ValidationError(WvbeatError):
    """Bad input data or inconsistent arguments (CLI exit code 2)."""


class FileFormatError(WvbeatError):
    """Unreadable, truncated or mis-versioned file (CLI exit code 3)."""


class DivergenceError(WvbeatError):
    """Training produced a non-finite loss (CLI exit code 4)."""
