"""Exception hierarchy shared by the library and the CLI."""


class QHarmonyError(Exception):
    """Base class for all package errors."""


class ConfigError(QHarmonyError, ValueError):
    """Malformed or out-of-range configuration (CLI exit code 2)."""


class NumericalError(QHarmonyError, ArithmeticError):
    """A numerical precondition failed: singular matrix, empty support, ... (CLI exit code 3)."""


class SupportError(NumericalError):
    """A probability table has no usable support."""
